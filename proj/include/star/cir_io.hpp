#pragma once

// Binary and CSV storage for CIR sequences.
//
// Binary layout (little-endian):
//   "CIR1" | u32 L | f64 T_c | f64 f_c | L x (f64 re, f64 im) | L x u8 mask | u32 n | n bytes JSON metadata

#include "star/errors.hpp"
#include "star/synth.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace star {

namespace detail {

class ByteWriter {
 public:
  void put_bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void put_u8(std::uint8_t v) { buf_.push_back(v); }
  void put_u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }
  void put_string(const std::string& s) {
    put_u32(static_cast<std::uint32_t>(s.size()));
    put_bytes(s.data(), s.size());
  }
  const std::vector<std::uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<std::uint8_t> data) : data_(std::move(data)) {}

  void need(std::size_t n, const char* what) const {
    if (pos_ + n > data_.size()) throw FormatError(std::string("truncated file while reading ") + what, pos_);
  }
  std::uint8_t get_u8(const char* what) {
    need(1, what);
    return data_[pos_++];
  }
  std::uint32_t get_u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t get_u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double get_f64(const char* what) { return std::bit_cast<double>(get_u64(what)); }
  std::string get_bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::string get_string(const char* what) { return get_bytes(get_u32(what), what); }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::vector<std::uint8_t> data_;
  std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace detail

inline nlohmann::json to_json(const SynthConfig& c) {
  return {{"window_len", c.window_len},       {"window_shift", c.window_shift},
          {"sample_period", c.sample_period}, {"carrier_freq", c.carrier_freq},
          {"min_scatterers", c.min_scatterers}, {"max_scatterers", c.max_scatterers},
          {"max_speed", c.max_speed},         {"freq_walk_std", c.freq_walk_std},
          {"min_amplitude", c.min_amplitude}, {"max_amplitude", c.max_amplitude},
          {"snr_db", std::isfinite(c.snr_db) ? nlohmann::json(c.snr_db) : nlohmann::json("inf")},
          {"on_grid", c.on_grid},             {"seed", c.seed},
          {"label", c.label}};
}

/// Reads the keys present in `j` into `c`; unknown keys are rejected.
inline void from_json(const nlohmann::json& j, SynthConfig& c) {
  for (const auto& [key, v] : j.items()) {
    if (key == "window_len") c.window_len = v.get<int>();
    else if (key == "window_shift") c.window_shift = v.get<int>();
    else if (key == "sample_period") c.sample_period = v.get<double>();
    else if (key == "carrier_freq") c.carrier_freq = v.get<double>();
    else if (key == "min_scatterers") c.min_scatterers = v.get<int>();
    else if (key == "max_scatterers") c.max_scatterers = v.get<int>();
    else if (key == "max_speed") c.max_speed = v.get<double>();
    else if (key == "freq_walk_std") c.freq_walk_std = v.get<double>();
    else if (key == "min_amplitude") c.min_amplitude = v.get<double>();
    else if (key == "max_amplitude") c.max_amplitude = v.get<double>();
    else if (key == "snr_db")
      c.snr_db = v.is_string() ? std::numeric_limits<double>::infinity() : v.get<double>();
    else if (key == "on_grid") c.on_grid = v.get<bool>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "label") c.label = v.get<std::string>();
    else throw ConfigError("unknown synth key: " + key);
  }
}

inline nlohmann::json meta_to_json(const SequenceMeta& m) {
  nlohmann::json truth = nlohmann::json::array();
  for (const auto& ts : m.truth) {
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (const auto& a : ts.amplitudes) {
      re.push_back(a.real());
      im.push_back(a.imag());
    }
    truth.push_back({{"amp_re", re}, {"amp_im", im}, {"freq_hz", ts.freqs_hz}});
  }
  return {{"config", to_json(m.config)}, {"truth", truth}};
}

inline SequenceMeta meta_from_json(const nlohmann::json& j) {
  SequenceMeta m;
  if (j.contains("config")) from_json(j.at("config"), m.config);
  if (j.contains("truth")) {
    for (const auto& e : j.at("truth")) {
      ToneSet ts;
      const auto re = e.at("amp_re").get<std::vector<double>>();
      const auto im = e.at("amp_im").get<std::vector<double>>();
      if (re.size() != im.size()) throw ConfigError("metadata amplitude length mismatch");
      for (std::size_t i = 0; i < re.size(); ++i) ts.amplitudes.emplace_back(re[i], im[i]);
      ts.freqs_hz = e.at("freq_hz").get<std::vector<double>>();
      m.truth.push_back(std::move(ts));
    }
  }
  return m;
}

inline std::vector<std::uint8_t> encode_cir(const CirSequence& seq) {
  if (static_cast<Eigen::Index>(seq.grid_mask.size()) != seq.size())
    throw ConfigError("encode_cir: mask length mismatch");
  detail::ByteWriter w;
  w.put_bytes("CIR1", 4);
  w.put_u32(static_cast<std::uint32_t>(seq.size()));
  w.put_f64(seq.meta.config.sample_period);
  w.put_f64(seq.meta.config.carrier_freq);
  for (Eigen::Index i = 0; i < seq.size(); ++i) {
    w.put_f64(seq.samples[i].real());
    w.put_f64(seq.samples[i].imag());
  }
  for (bool b : seq.grid_mask) w.put_u8(b ? 1 : 0);
  w.put_string(meta_to_json(seq.meta).dump());
  return w.bytes();
}

inline CirSequence decode_cir(std::vector<std::uint8_t> bytes) {
  detail::ByteReader r(std::move(bytes));
  if (r.get_bytes(4, "magic") != "CIR1") throw FormatError("bad magic, expected CIR1", 0);
  const std::uint32_t len = r.get_u32("length");
  const double tc = r.get_f64("T_c");
  const double fc = r.get_f64("f_c");
  r.need(static_cast<std::size_t>(len) * 17, "sample body");
  CirSequence seq;
  seq.samples.resize(len);
  for (std::uint32_t i = 0; i < len; ++i) {
    const double re = r.get_f64("sample");
    const double im = r.get_f64("sample");
    seq.samples[i] = {re, im};
  }
  seq.grid_mask.resize(len);
  for (std::uint32_t i = 0; i < len; ++i) {
    const auto off = r.pos();
    const std::uint8_t b = r.get_u8("mask");
    if (b > 1) throw FormatError("mask byte must be 0 or 1", off);
    seq.grid_mask[i] = b == 1;
  }
  const auto meta_off = r.pos();
  const std::string blob = r.get_string("metadata");
  if (!r.done()) throw FormatError("trailing bytes after metadata", r.pos());
  try {
    seq.meta = meta_from_json(nlohmann::json::parse(blob));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad metadata: ") + e.what(), meta_off);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("bad metadata: ") + e.what(), meta_off);
  }
  seq.meta.config.sample_period = tc;
  seq.meta.config.carrier_freq = fc;
  return seq;
}

inline void save_cir(const std::string& path, const CirSequence& seq) { detail::write_file(path, encode_cir(seq)); }

using WarningSink = std::function<void(const std::string&)>;

inline void default_warning(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

/// CSV input with columns index,real,imag[,mask]. A missing mask column means all samples are available.
inline CirSequence load_cir_csv(const std::string& path, const WarningSink& warn = default_warning) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::uint64_t offset = 0;
  if (!std::getline(in, line)) throw FormatError("empty CSV", 0);
  offset += line.size() + 1;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool has_mask = false;
  if (line == "index,real,imag,mask") has_mask = true;
  else if (line != "index,real,imag") throw FormatError("unexpected CSV header: " + line, 0);
  if (!has_mask) warn(path + ": no mask column, assuming every sample is available");

  std::vector<cdouble> vals;
  Mask mask;
  while (std::getline(in, line)) {
    const std::uint64_t line_off = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[4];
    int n = 0;
    while (n < 4 && std::getline(ss, f[n], ',')) ++n;
    if (n != (has_mask ? 4 : 3)) throw FormatError("wrong column count", line_off);
    try {
      if (std::stoll(f[0]) != static_cast<long long>(vals.size())) throw FormatError("index out of sequence", line_off);
      vals.emplace_back(std::stod(f[1]), std::stod(f[2]));
      mask.push_back(has_mask ? std::stoi(f[3]) != 0 : true);
    } catch (const std::logic_error&) {
      throw FormatError("unparsable number", line_off);
    }
  }
  CirSequence seq;
  seq.samples = Eigen::Map<const ComplexVector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  seq.grid_mask = std::move(mask);
  return seq;
}

/// Loads a binary CIR file, or a CSV file when the path ends in ".csv".
inline CirSequence load_cir(const std::string& path, const WarningSink& warn = default_warning) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return load_cir_csv(path, warn);
  return decode_cir(detail::read_file(path));
}

}  // namespace star
