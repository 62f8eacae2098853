#pragma once

// STAR forward pass: one learned IHT layer, power conversion, dot-product
// attention over past output spectra and the additive/multiplicative refinement.

#include "star/errors.hpp"
#include "star/numerics.hpp"
#include "star/synth.hpp"

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace star {

enum class Variant {
  full,          // LIHT + attention + additive and multiplicative refinement
  no_attention,  // LIHT only
  only_add,      // refinement without the multiplicative gate
  learn_s,       // LIHT with a free 2K x 2K matrix S in place of I - W^T W / mu
};

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::full: return "none";
    case Variant::no_attention: return "no-attention";
    case Variant::only_add: return "only-add";
    case Variant::learn_s: return "learn-s";
  }
  return "none";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "none" || s == "full") return Variant::full;
  if (s == "no-attention") return Variant::no_attention;
  if (s == "only-add") return Variant::only_add;
  if (s == "learn-s") return Variant::learn_s;
  throw ConfigError("unknown ablation: " + s);
}

inline bool uses_attention(Variant v) { return v != Variant::no_attention; }
inline bool uses_gate(Variant v) { return v == Variant::full || v == Variant::learn_s; }

struct Hyper {
  int window_len = 64;  // K
  int sparsity = 5;     // Omega
  double mu = 20.0;
  int past = 6;         // N_p
  Variant variant = Variant::full;
};

struct ModelParams {
  Hyper hyper;
  RealMatrix W;  // 2K x 2K
  RealMatrix U;  // K x K
  RealMatrix V;  // K x K
  RealVector b;  // K
  RealMatrix S;  // 2K x 2K, only for Variant::learn_s (empty otherwise)

  int k() const { return hyper.window_len; }
};

/// Learnable parameter count: 4K^2 for W, 2K^2 + K for U, V, b and 4K^2 more for S.
inline long long count_params(int k, bool learn_s) {
  const long long kk = k;
  return 4 * kk * kk + 2 * kk * kk + kk + (learn_s ? 4 * kk * kk : 0);
}

inline long long count_params(int k, Variant v) {
  const long long kk = k;
  switch (v) {
    case Variant::full: return count_params(k, false);
    case Variant::learn_s: return count_params(k, true);
    case Variant::no_attention: return 4 * kk * kk;
    case Variant::only_add: return 4 * kk * kk + kk * kk + kk;
  }
  return 0;
}

/// W = R(F_K); U, V, b ~ U(-1/sqrt(K), 1/sqrt(K)); S (learn-s only) = I - W^T W / mu.
inline ModelParams param_init(const Hyper& hyper, std::uint64_t seed) {
  const int k = hyper.window_len;
  if (k < 1) throw ConfigError("window length must be >= 1");
  if (hyper.sparsity < 1 || hyper.sparsity > k) throw ConfigError("sparsity must be in [1, K]");
  if (!(hyper.mu > 0)) throw ConfigError("mu must be > 0");
  if (hyper.past < 1) throw ConfigError("number of past windows must be >= 1");

  ModelParams p;
  p.hyper = hyper;
  p.W = realize_matrix(inverse_dft_matrix(k));
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(k));
  std::uniform_real_distribution<double> dist(-bound, bound);
  p.U = RealMatrix::NullaryExpr(k, k, [&] { return dist(rng); });
  p.V = RealMatrix::NullaryExpr(k, k, [&] { return dist(rng); });
  p.b = RealVector::NullaryExpr(k, [&] { return dist(rng); });
  if (hyper.variant == Variant::learn_s)
    p.S = RealMatrix::Identity(2 * k, 2 * k) - p.W.transpose() * p.W / hyper.mu;
  return p;
}

inline ModelParams param_init(int k, std::uint64_t seed) {
  Hyper h;
  h.window_len = k;
  h.sparsity = std::min(h.sparsity, k);
  return param_init(h, seed);
}

/// Causal ring of the N_p most recent output spectra, most recent first.
class PastBuffer {
 public:
  PastBuffer(int past, int k) : k_(k), rows_(static_cast<std::size_t>(past), Spectrum::Zero(k)) {
    if (past < 1) throw ConfigError("PastBuffer needs at least one slot");
  }

  void push(const Spectrum& y) {
    rows_.pop_back();
    rows_.push_front(y);
  }

  /// N_p x K matrix whose row i holds y[t - 1 - i].
  RealMatrix matrix() const {
    RealMatrix m(static_cast<Eigen::Index>(rows_.size()), k_);
    for (std::size_t i = 0; i < rows_.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows_[i].transpose();
    return m;
  }

  int size() const { return static_cast<int>(rows_.size()); }
  const Spectrum& at(int i) const { return rows_[static_cast<std::size_t>(i)]; }

 private:
  int k_;
  std::deque<Spectrum> rows_;
};

inline Spectrum md_convert(const RealizedDft& z) { return bin_power(z); }

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct AttentionResult {
  Spectrum context;     // a
  RealVector weights;   // softmax over the N_p past spectra
};

/// w = softmax(Y y~ / sqrt(K)), a = Y^T w. No learnable parameters.
inline AttentionResult attention_context(const Spectrum& ytilde, const RealMatrix& past) {
  const double k = static_cast<double>(ytilde.size());
  RealVector scores = past * ytilde / std::sqrt(k);
  const double top = scores.maxCoeff();
  RealVector w = (scores.array() - top).exp();
  w /= w.sum();
  return {past.transpose() * w, w};
}

inline AttentionResult attention_context(const Spectrum& ytilde, const PastBuffer& buf) {
  return attention_context(ytilde, buf.matrix());
}

/// Supports to hold fixed instead of recomputing them (finite-difference checks).
struct FrozenSupport {
  std::vector<int> first;   // support of z0
  std::vector<int> second;  // support of z
};

/// Every intermediate of one window's forward pass, kept for the backward pass.
struct WindowTrace {
  RealVector hbar;            // realized zero-filled window
  RealVector row_mask;        // realized availability (0/1), length 2K
  RealVector u;               // W^T hbar / mu
  std::vector<int> support0;
  RealVector z0;
  RealVector wz0;             // row_mask .* (W z0); unused by learn-s
  std::vector<int> support1;
  RealizedDft z;
  Spectrum ytilde;
  RealMatrix past;            // N_p x K snapshot of the buffer
  RealVector weights;
  Spectrum context;
  RealVector pre_add;         // U a + b
  RealVector gate;            // sigma(V a)
  Spectrum y;
};

namespace detail {

inline std::vector<int> realized_indices(const std::vector<int>& support, int k) {
  std::vector<int> idx;
  idx.reserve(support.size() * 2);
  for (int i : support) idx.push_back(i);
  for (int i : support) idx.push_back(i + k);
  return idx;
}

}  // namespace detail

/// LIHT layer with the measurement rows of W selected by the window mask:
///   z0 = H(W^T hbar / mu),  z = H((I - W^T D W / mu) z0 + W^T hbar / mu)
/// where D zeroes unavailable rows. At W = R(F_K) this is exactly one IHT iteration.
inline void liht_forward_into(const CirWindow& window, const ModelParams& p, WindowTrace& tr,
                              const FrozenSupport* frozen = nullptr) {
  const int k = p.k();
  if (window.values.size() != k || static_cast<int>(window.mask.size()) != k)
    throw ConfigError("window length does not match model K");
  const double mu = p.hyper.mu;
  tr.hbar = realize_vector(window.values);
  tr.row_mask.resize(2 * k);
  for (int i = 0; i < k; ++i) {
    const double m = window.mask[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    tr.row_mask[i] = m;
    tr.row_mask[i + k] = m;
    if (m == 0.0) {
      tr.hbar[i] = 0.0;
      tr.hbar[i + k] = 0.0;
    }
  }

  tr.u = RealVector::Zero(2 * k);
  for (int r = 0; r < 2 * k; ++r)
    if (tr.row_mask[r] != 0.0 && tr.hbar[r] != 0.0) tr.u += p.W.row(r).transpose() * tr.hbar[r];
  tr.u /= mu;

  if (frozen) {
    tr.support0 = frozen->first;
    tr.z0 = apply_support(tr.u, tr.support0);
  } else {
    auto th = hard_threshold(tr.u, p.hyper.sparsity);
    tr.support0 = std::move(th.support);
    tr.z0 = std::move(th.value);
  }

  RealVector v = tr.u;
  const auto idx0 = detail::realized_indices(tr.support0, k);
  if (p.hyper.variant == Variant::learn_s) {
    for (int j : idx0) v += p.S.col(j) * tr.z0[j];
    tr.wz0.resize(0);
  } else {
    tr.wz0 = RealVector::Zero(2 * k);
    for (int j : idx0) tr.wz0 += p.W.col(j) * tr.z0[j];
    tr.wz0.array() *= tr.row_mask.array();
    v += tr.z0;
    for (int r = 0; r < 2 * k; ++r)
      if (tr.wz0[r] != 0.0) v -= p.W.row(r).transpose() * (tr.wz0[r] / mu);
  }

  if (frozen) {
    tr.support1 = frozen->second;
    tr.z = apply_support(v, tr.support1);
  } else {
    auto th = hard_threshold(v, p.hyper.sparsity);
    tr.support1 = std::move(th.support);
    tr.z = std::move(th.value);
  }
}

struct LihtOutput {
  RealizedDft z;
  std::vector<int> support;
};

inline LihtOutput liht_forward(const CirWindow& window, const ModelParams& p) {
  WindowTrace tr;
  liht_forward_into(window, p, tr);
  return {tr.z, tr.support1};
}

/// y = (y~ + ReLU(U a + b)) .* sigma(V a); the gate is dropped for the only-add variant.
inline Spectrum refine(const Spectrum& ytilde, const Spectrum& a, const ModelParams& p) {
  const RealVector add = (p.U * a + p.b).cwiseMax(0.0);
  if (!uses_gate(p.hyper.variant)) return ytilde + add;
  const RealVector gate = (p.V * a).unaryExpr([](double x) { return sigmoid(x); });
  return (ytilde + add).cwiseProduct(gate);
}

/// Full forward pass of one window against a fixed past-spectra matrix.
inline WindowTrace forward_traced(const CirWindow& window, const RealMatrix& past, const ModelParams& p,
                                  const FrozenSupport* frozen = nullptr) {
  WindowTrace tr;
  liht_forward_into(window, p, tr, frozen);
  tr.ytilde = md_convert(tr.z);
  tr.past = past;
  if (!uses_attention(p.hyper.variant)) {
    tr.y = tr.ytilde;
    return tr;
  }
  auto att = attention_context(tr.ytilde, past);
  tr.weights = std::move(att.weights);
  tr.context = std::move(att.context);
  tr.pre_add = p.U * tr.context + p.b;
  const RealVector add = tr.pre_add.cwiseMax(0.0);
  if (uses_gate(p.hyper.variant)) {
    tr.gate = (p.V * tr.context).unaryExpr([](double x) { return sigmoid(x); });
    tr.y = (tr.ytilde + add).cwiseProduct(tr.gate);
  } else {
    tr.y = tr.ytilde + add;
  }
  return tr;
}

/// Runs one window and pushes its output into the buffer afterwards.
inline Spectrum star_forward_window(const CirWindow& window, PastBuffer& buf, const ModelParams& p) {
  WindowTrace tr = forward_traced(window, buf.matrix(), p);
  buf.push(tr.y);
  return tr.y;
}

/// Fresh zero buffer, windows processed in order.
inline std::vector<Spectrum> star_forward_sequence(const std::vector<CirWindow>& windows, const ModelParams& p) {
  PastBuffer buf(p.hyper.past, p.k());
  std::vector<Spectrum> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(star_forward_window(w, buf, p));
  return out;
}

/// Realized DFT outputs of the LIHT layer for a whole sequence.
inline std::vector<RealizedDft> liht_sequence(const std::vector<CirWindow>& windows, const ModelParams& p) {
  std::vector<RealizedDft> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(liht_forward(w, p).z);
  return out;
}

}  // namespace star
