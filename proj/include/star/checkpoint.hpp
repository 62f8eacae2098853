#pragma once

// Checkpoint layout (little-endian):
//   "STAR" | u32 version | u32 K | u32 variant | u32 sparsity | f64 mu | u32 past
//   | tensors W, U, V, b[, S] each as u64 count + count x f64
//   | u64 optimizer step | Adam m tensors | Adam v tensors (same order)
//   | u32 n | n bytes JSON metadata

#include "star/cir_io.hpp"
#include "star/training.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace star {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  AdamState optimizer;
  nlohmann::json meta = nlohmann::json::object();
};

namespace detail {

inline void put_tensor(ByteWriter& w, const double* data, Eigen::Index n) {
  w.put_u64(static_cast<std::uint64_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) w.put_f64(data[i]);
}

inline void get_tensor(ByteReader& r, double* data, Eigen::Index n, const char* name) {
  const auto off = r.pos();
  const std::uint64_t count = r.get_u64(name);
  if (count != static_cast<std::uint64_t>(n))
    throw FormatError(std::string("tensor ") + name + " has " + std::to_string(count) + " entries, expected " +
                          std::to_string(n),
                      off);
  for (Eigen::Index i = 0; i < n; ++i) data[i] = r.get_f64(name);
}

template <typename T>
void put_tensors(ByteWriter& w, const T& t) {
  put_tensor(w, t.W.data(), t.W.size());
  put_tensor(w, t.U.data(), t.U.size());
  put_tensor(w, t.V.data(), t.V.size());
  put_tensor(w, t.b.data(), t.b.size());
  if (t.S.size() > 0) put_tensor(w, t.S.data(), t.S.size());
}

template <typename T>
void get_tensors(ByteReader& r, T& t) {
  get_tensor(r, t.W.data(), t.W.size(), "W");
  get_tensor(r, t.U.data(), t.U.size(), "U");
  get_tensor(r, t.V.data(), t.V.size(), "V");
  get_tensor(r, t.b.data(), t.b.size(), "b");
  if (t.S.size() > 0) get_tensor(r, t.S.data(), t.S.size(), "S");
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  const ModelParams& p = c.params;
  detail::ByteWriter w;
  w.put_bytes("STAR", 4);
  w.put_u32(kCheckpointVersion);
  w.put_u32(static_cast<std::uint32_t>(p.k()));
  w.put_u32(static_cast<std::uint32_t>(p.hyper.variant));
  w.put_u32(static_cast<std::uint32_t>(p.hyper.sparsity));
  w.put_f64(p.hyper.mu);
  w.put_u32(static_cast<std::uint32_t>(p.hyper.past));
  detail::put_tensors(w, p);
  w.put_u64(c.optimizer.step);
  // Moments are stored even at step 0 so the layout never depends on training state.
  const AdamState st = c.optimizer.m.W.size() == p.W.size() ? c.optimizer : AdamState::zeros_like(p);
  detail::put_tensors(w, st.m);
  detail::put_tensors(w, st.v);
  w.put_string(c.meta.dump());
  return w.bytes();
}

/// Decodes a checkpoint; `expected_k` rejects a window-length mismatch up front.
inline Checkpoint decode_checkpoint(std::vector<std::uint8_t> bytes, std::optional<int> expected_k = std::nullopt) {
  detail::ByteReader r(std::move(bytes));
  if (r.get_bytes(4, "magic") != "STAR") throw FormatError("bad magic, expected STAR", 0);
  const std::uint32_t version = r.get_u32("version");
  if (version != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version), 4);
  const auto k_off = r.pos();
  const std::uint32_t k = r.get_u32("K");
  if (k == 0 || k > 4096) throw FormatError("implausible window length " + std::to_string(k), k_off);
  if (expected_k && static_cast<int>(k) != *expected_k)
    throw ConfigError("checkpoint K=" + std::to_string(k) + " does not match configured K=" +
                      std::to_string(*expected_k));
  const auto v_off = r.pos();
  const std::uint32_t variant = r.get_u32("variant");
  if (variant > static_cast<std::uint32_t>(Variant::learn_s))
    throw FormatError("unknown variant code " + std::to_string(variant), v_off);

  Hyper h;
  h.window_len = static_cast<int>(k);
  h.variant = static_cast<Variant>(variant);
  h.sparsity = static_cast<int>(r.get_u32("sparsity"));
  h.mu = r.get_f64("mu");
  h.past = static_cast<int>(r.get_u32("past"));

  Checkpoint c;
  try {
    c.params = param_init(h, 0);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("bad hyperparameters: ") + e.what(), k_off);
  }
  detail::get_tensors(r, c.params);
  c.optimizer = AdamState::zeros_like(c.params);
  c.optimizer.step = r.get_u64("step");
  detail::get_tensors(r, c.optimizer.m);
  detail::get_tensors(r, c.optimizer.v);
  const auto meta_off = r.pos();
  const std::string blob = r.get_string("metadata");
  if (!r.done()) throw FormatError("trailing bytes after metadata", r.pos());
  try {
    c.meta = nlohmann::json::parse(blob);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad metadata: ") + e.what(), meta_off);
  }
  return c;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
  detail::write_file(path, encode_checkpoint(c));
}

inline Checkpoint load_checkpoint(const std::string& path, std::optional<int> expected_k = std::nullopt) {
  return decode_checkpoint(detail::read_file(path), expected_k);
}

}  // namespace star
