// Copyright 2026 The diarkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "diarkit/formats.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "diarkit/error.h"
#include "json.hpp"

namespace diarkit {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary codecs assume a little-endian host");

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename F>
void for_each_line(std::string_view text, F &&f) {
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    f(++line_no, line);
    pos = nl + 1;
  }
}

bool parse_double(std::string_view token, double *out) {
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), *out);
  return ec == std::errc() && ptr == token.data() + token.size() &&
         std::isfinite(*out);
}

double expect_double(std::string_view token, std::size_t line,
                     const char *what) {
  double v = 0.0;
  if (!parse_double(token, &v)) {
    throw ParseError(std::string("bad ") + what + " '" + std::string(token) + "'",
                     line);
  }
  return v;
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

template <typename T>
void put_le(std::string *out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out->append(buf, sizeof(T));
}

template <typename T>
T get_le(std::string_view bytes, std::size_t *pos) {
  if (*pos + sizeof(T) > bytes.size()) throw ParseError("truncated payload");
  T value;
  std::memcpy(&value, bytes.data() + *pos, sizeof(T));
  *pos += sizeof(T);
  return value;
}

constexpr char kXvecMagic[] = "XVEC0001";

}  // namespace

BackendModel BackendModel::identity(const Eigen::VectorXd &phi) {
  BackendModel m;
  m.mean = Eigen::VectorXd::Zero(phi.size());
  m.lda = Eigen::MatrixXd::Identity(phi.size(), phi.size());
  m.phi = phi;
  return m;
}

std::vector<Annotation> parse_rttm(std::string_view text) {
  std::map<std::string, Annotation> by_file;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto fields = split_ws(line);
    if (fields.empty() || fields[0].front() == ';') return;
    if (fields[0] != "SPEAKER") return;
    if (fields.size() < 8) {
      throw ParseError("SPEAKER line needs at least 8 fields", line_no);
    }
    const double onset = expect_double(fields[3], line_no, "onset");
    const double dur = expect_double(fields[4], line_no, "duration");
    if (onset < 0.0) throw ParseError("negative onset", line_no);
    if (dur < 0.0) throw ParseError("negative duration", line_no);
    if (!(dur > kTimeEps)) throw ParseError("zero duration", line_no);
    const std::string file(fields[1]);
    auto it = by_file.find(file);
    if (it == by_file.end()) it = by_file.emplace(file, Annotation(file)).first;
    it->second.add(Segment(onset, onset + dur), std::string(fields[7]));
  });
  std::vector<Annotation> out;
  for (auto &[id, a] : by_file) out.push_back(std::move(a));
  return out;
}

std::string emit_rttm(const std::vector<Annotation> &annotations) {
  struct Row {
    const std::string *file;
    double onset, dur;
    const std::string *label;
  };
  std::vector<Row> rows;
  for (const auto &a : annotations) {
    for (const auto &e : a.entries()) {
      rows.push_back({&a.recording_id(), e.segment.start(), e.segment.duration(),
                      &e.label});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row &x, const Row &y) {
    if (*x.file != *y.file) return *x.file < *y.file;
    if (x.onset != y.onset) return x.onset < y.onset;
    if (*x.label != *y.label) return *x.label < *y.label;
    return x.dur < y.dur;
  });
  std::string out;
  for (const auto &r : rows) {
    const std::string dur = format_fixed(r.dur, 3);
    // Slivers that print as 0.000 cannot be read back.
    if (dur == "0.000") continue;
    out += "SPEAKER " + *r.file + " 1 " + format_fixed(r.onset, 3) + " " + dur +
           " <NA> <NA> " + *r.label + " <NA> <NA>\n";
  }
  return out;
}

XVectorSequence read_xvectors(std::string_view bytes, std::string recording_id) {
  if (bytes.size() < 8 || bytes.substr(0, 8) != std::string_view(kXvecMagic, 8)) {
    throw ParseError("bad XVEC magic");
  }
  std::size_t pos = 8;
  const auto count = get_le<std::uint32_t>(bytes, &pos);
  const auto dim = get_le<std::uint32_t>(bytes, &pos);
  if (dim == 0) throw ParseError("XVEC dim must be positive");
  const std::size_t record = 16 + 4 * static_cast<std::size_t>(dim);
  if (bytes.size() - pos < record * count) throw ParseError("truncated payload");
  XVectorSequence x;
  x.recording_id = std::move(recording_id);
  x.windows.reserve(count);
  x.vectors.resize(count, dim);
  for (std::uint32_t t = 0; t < count; ++t) {
    const double start = get_le<double>(bytes, &pos);
    const double end = get_le<double>(bytes, &pos);
    Segment w(0.0, 1.0);
    try {
      w = Segment(start, end);
    } catch (const Error &e) {
      throw ParseError("record " + std::to_string(t) + ": " + e.what());
    }
    if (!x.windows.empty() && w.start() < x.windows.back().start()) {
      throw ParseError("record " + std::to_string(t) + ": windows not sorted");
    }
    x.windows.push_back(w);
    for (std::uint32_t d = 0; d < dim; ++d) {
      const float v = get_le<float>(bytes, &pos);
      if (!std::isfinite(v)) {
        throw ParseError("record " + std::to_string(t) + ": non-finite value");
      }
      x.vectors(t, d) = v;
    }
  }
  if (pos != bytes.size()) throw ParseError("trailing bytes after XVEC payload");
  return x;
}

std::string write_xvectors(const XVectorSequence &x) {
  std::string out(kXvecMagic, 8);
  put_le<std::uint32_t>(&out, static_cast<std::uint32_t>(x.size()));
  put_le<std::uint32_t>(&out, static_cast<std::uint32_t>(x.dim()));
  for (std::size_t t = 0; t < x.size(); ++t) {
    put_le<double>(&out, x.windows[t].start());
    put_le<double>(&out, x.windows[t].end());
    for (int d = 0; d < x.dim(); ++d) {
      put_le<float>(&out, static_cast<float>(x.vectors(t, d)));
    }
  }
  return out;
}

FrameScores read_frame_scores(std::string_view text, std::string recording_id) {
  FrameScores fs;
  fs.recording_id = std::move(recording_id);
  bool have_step = false, have_offset = false;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto tokens = split_ws(line);
    if (tokens.empty()) return;
    if (tokens[0].front() == '#') {
      for (auto tok : tokens) {
        if (tok.starts_with("#step=")) {
          fs.step = expect_double(tok.substr(6), line_no, "step");
          if (!(fs.step > 0.0)) throw ParseError("step must be positive", line_no);
          have_step = true;
        } else if (tok.starts_with("#offset=")) {
          fs.offset = expect_double(tok.substr(8), line_no, "offset");
          have_offset = true;
        }
      }
      return;
    }
    if (!have_step || !have_offset) {
      throw ParseError("score before #step/#offset header", line_no);
    }
    if (tokens.size() != 1) throw ParseError("expected one score per line", line_no);
    fs.values.push_back(expect_double(tokens[0], line_no, "score"));
  });
  if (!have_step || !have_offset) throw ParseError("missing #step/#offset header");
  return fs;
}

std::string write_frame_scores(const FrameScores &fs) {
  char buf[64];
  std::string out;
  std::snprintf(buf, sizeof(buf), "#step=%.6f\n#offset=%.6f\n", fs.step, fs.offset);
  out += buf;
  for (double v : fs.values) {
    std::snprintf(buf, sizeof(buf), "%.6g\n", v);
    out += buf;
  }
  return out;
}

void validate(const BackendModel &m) {
  if (m.dim() <= 0 || m.lda_dim() <= 0) throw Error("model: empty LDA matrix");
  if (m.mean.size() != m.dim()) {
    throw Error("model: mean has " + std::to_string(m.mean.size()) +
                " values but dim is " + std::to_string(m.dim()));
  }
  if (m.lda_dim() > m.dim()) throw Error("model: lda_dim exceeds dim");
  if (m.phi.size() != m.lda_dim()) {
    throw Error("model: phi has " + std::to_string(m.phi.size()) +
                " values but lda_dim is " + std::to_string(m.lda_dim()));
  }
  for (int r = 0; r < m.phi.size(); ++r) {
    if (!std::isfinite(m.phi[r]) || m.phi[r] < 0.0) {
      throw Error("model: phi must be finite and non-negative");
    }
    if (r > 0 && m.phi[r] > m.phi[r - 1]) {
      throw Error("model: phi must be sorted in descending order");
    }
  }
  if (!m.mean.allFinite() || !m.lda.allFinite()) {
    throw Error("model: non-finite parameters");
  }
}

BackendModel read_backend_model(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  BackendModel m;
  try {
    const int dim = j.at("dim").get<int>();
    const int lda_dim = j.at("lda_dim").get<int>();
    if (dim <= 0 || lda_dim <= 0) throw Error("model: dims must be positive");
    const auto mean = j.at("mean").get<std::vector<double>>();
    const auto lda = j.at("lda").get<std::vector<double>>();
    const auto phi = j.at("phi").get<std::vector<double>>();
    if (lda.size() != static_cast<std::size_t>(dim) * lda_dim) {
      throw Error("model: lda has " + std::to_string(lda.size()) +
                  " values, expected dim * lda_dim");
    }
    m.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
    m.lda = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                            Eigen::RowMajor>>(lda.data(), dim,
                                                              lda_dim);
    m.phi = Eigen::Map<const Eigen::VectorXd>(phi.data(), phi.size());
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  validate(m);
  return m;
}

std::string write_backend_model(const BackendModel &m) {
  validate(m);
  nlohmann::json j;
  j["dim"] = m.dim();
  j["lda_dim"] = m.lda_dim();
  j["mean"] = std::vector<double>(m.mean.data(), m.mean.data() + m.mean.size());
  std::vector<double> lda;
  lda.reserve(m.lda.size());
  for (int r = 0; r < m.lda.rows(); ++r) {
    for (int c = 0; c < m.lda.cols(); ++c) lda.push_back(m.lda(r, c));
  }
  j["lda"] = lda;
  j["phi"] = std::vector<double>(m.phi.data(), m.phi.data() + m.phi.size());
  return j.dump() + "\n";
}

Timeline read_lab(std::string_view text) {
  std::vector<Segment> segs;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto f = split_ws(line);
    if (f.empty() || f[0].front() == '#') return;
    if (f.size() < 2) throw ParseError("LAB line needs start and end", line_no);
    if (f.size() >= 3 && f[2] != "speech") return;
    const double s = expect_double(f[0], line_no, "start");
    const double e = expect_double(f[1], line_no, "end");
    try {
      segs.emplace_back(s, e);
    } catch (const Error &err) {
      throw ParseError(err.what(), line_no);
    }
  });
  return Timeline(std::move(segs));
}

std::string write_lab(const Timeline &speech) {
  std::string out;
  for (const auto &s : speech) {
    out += format_fixed(s.start(), 3) + " " + format_fixed(s.end(), 3) + " speech\n";
  }
  return out;
}

std::vector<WindowLabel> read_second_labels(std::string_view text,
                                            std::string *recording_id) {
  std::vector<WindowLabel> out;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto f = split_ws(line);
    if (f.empty() || f[0].front() == '#') return;
    if (f.size() != 4) throw ParseError("SECOND line needs 4 fields", line_no);
    if (recording_id) {
      if (recording_id->empty()) {
        *recording_id = std::string(f[0]);
      } else if (*recording_id != f[0]) {
        throw ParseError("mixed recording ids in second-label file", line_no);
      }
    }
    const double s = expect_double(f[1], line_no, "start");
    const double e = expect_double(f[2], line_no, "end");
    WindowLabel wl{Segment(0.0, 1.0), std::nullopt};
    try {
      wl.window = Segment(s, e);
    } catch (const Error &err) {
      throw ParseError(err.what(), line_no);
    }
    if (f[3] != "<NA>") wl.label = std::string(f[3]);
    out.push_back(std::move(wl));
  });
  return out;
}

std::string write_second_labels(const std::string &recording_id,
                                const std::vector<WindowLabel> &labels) {
  // Window bounds keep full precision so they match the embedding file.
  char buf[64];
  std::string out;
  for (const auto &wl : labels) {
    std::snprintf(buf, sizeof(buf), " %.17g %.17g ", wl.window.start(),
                  wl.window.end());
    out += recording_id + buf + (wl.label ? *wl.label : "<NA>") + "\n";
  }
  return out;
}

WavData read_wav(std::string_view bytes) {
  std::size_t pos = 0;
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" ||
      bytes.substr(8, 4) != "WAVE") {
    throw ParseError("not a RIFF/WAVE file");
  }
  pos = 12;
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (pos + 8 <= bytes.size()) {
    const std::string_view id = bytes.substr(pos, 4);
    pos += 4;
    const auto size = get_le<std::uint32_t>(bytes, &pos);
    if (pos + size > bytes.size()) throw ParseError("truncated WAV chunk");
    if (id == "fmt ") {
      std::size_t p = pos;
      format = get_le<std::uint16_t>(bytes, &p);
      channels = get_le<std::uint16_t>(bytes, &p);
      rate = get_le<std::uint32_t>(bytes, &p);
      p += 6;  // byte rate, block align
      bits = get_le<std::uint16_t>(bytes, &p);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw ParseError("WAV data chunk before fmt chunk");
      if (format != 1) throw ParseError("unsupported WAV encoding (PCM only)");
      if (channels != 1) {
        throw ParseError("unsupported channel count " + std::to_string(channels));
      }
      if (bits != 16) throw ParseError("unsupported sample width (16-bit only)");
      WavData wav;
      wav.sample_rate = static_cast<int>(rate);
      wav.samples.resize(size / 2);
      for (std::size_t i = 0; i < wav.samples.size(); ++i) {
        std::int16_t v;
        std::memcpy(&v, bytes.data() + pos + 2 * i, 2);
        wav.samples[i] = static_cast<double>(v) / 32768.0;
      }
      return wav;
    }
    pos += size + (size & 1);
  }
  throw ParseError("WAV file has no data chunk");
}

std::string write_wav(int sample_rate, const std::vector<double> &samples) {
  std::string out = "RIFF";
  const auto data_bytes = static_cast<std::uint32_t>(2 * samples.size());
  put_le<std::uint32_t>(&out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_le<std::uint32_t>(&out, 16);
  put_le<std::uint16_t>(&out, 1);
  put_le<std::uint16_t>(&out, 1);
  put_le<std::uint32_t>(&out, static_cast<std::uint32_t>(sample_rate));
  put_le<std::uint32_t>(&out, static_cast<std::uint32_t>(sample_rate) * 2);
  put_le<std::uint16_t>(&out, 2);
  put_le<std::uint16_t>(&out, 16);
  out += "data";
  put_le<std::uint32_t>(&out, data_bytes);
  for (double s : samples) {
    const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    put_le<std::int16_t>(&out, static_cast<std::int16_t>(scaled));
  }
  return out;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string &path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write failed for '" + path + "'");
}

std::string file_stem(const std::string &path) {
  return std::filesystem::path(path).stem().string();
}

}  // namespace diarkit
