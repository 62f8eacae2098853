#pragma once

#include "star/model.hpp"
#include "star/solvers.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace star {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  double alpha = 0.9;
  double beta = 0.1;
  double lr = 2e-4;
  int epochs = 5;
  Hyper hyper;           // K, Omega, mu, N_p, variant
  int window_shift = 32;
  double p_max = 0.9;
  std::map<std::string, int> oversample;  // label -> copies per epoch
  std::uint64_t seed = 7;
  AdamConfig adam;
  bool detach_past = true;

  void validate() const {
    if (alpha < 0 || beta < 0 || !(alpha + beta > 0)) throw ConfigError("loss weights must be >= 0 with a positive sum");
    if (!(lr > 0)) throw ConfigError("learning rate must be > 0");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (window_shift < 1 || window_shift > hyper.window_len) throw ConfigError("window shift must be in [1, K]");
    if (!(p_max >= 0 && p_max < 1)) throw ConfigError("p_max must be in [0, 1)");
    for (const auto& [label, f] : oversample)
      if (f < 1) throw ConfigError("oversample factor for " + label + " must be >= 1");
  }
};

/// Same shapes as the learnable tensors of ModelParams.
struct Gradients {
  RealMatrix W, U, V, S;
  RealVector b;

  static Gradients zeros_like(const ModelParams& p) {
    Gradients g;
    g.W = RealMatrix::Zero(p.W.rows(), p.W.cols());
    g.U = RealMatrix::Zero(p.U.rows(), p.U.cols());
    g.V = RealMatrix::Zero(p.V.rows(), p.V.cols());
    g.S = RealMatrix::Zero(p.S.rows(), p.S.cols());
    g.b = RealVector::Zero(p.b.size());
    return g;
  }

  Gradients& operator+=(const Gradients& o) {
    W += o.W;
    U += o.U;
    V += o.V;
    S += o.S;
    b += o.b;
    return *this;
  }

  Gradients& operator*=(double s) {
    W *= s;
    U *= s;
    V *= s;
    S *= s;
    b *= s;
    return *this;
  }
};

/// Visits matching tensors of two parameter-shaped objects as flat arrays, in the
/// declared order W, U, V, b, S.
template <typename A, typename B, typename F>
void visit_tensors(A& a, B& b, F&& f) {
  f("W", a.W.data(), b.W.data(), a.W.size());
  f("U", a.U.data(), b.U.data(), a.U.size());
  f("V", a.V.data(), b.V.data(), a.V.size());
  f("b", a.b.data(), b.b.data(), a.b.size());
  f("S", a.S.data(), b.S.data(), a.S.size());
}

inline void check_finite(const Gradients& g) {
  auto check = [](const char* name, const auto& t) {
    if (!t.allFinite()) throw NumericError(std::string("non-finite gradient in tensor ") + name);
  };
  check("W", g.W);
  check("U", g.U);
  check("V", g.V);
  check("b", g.b);
  check("S", g.S);
}

/// alpha * MSE(y, y_gt) + beta * MSE(z, z_gt), means taken over entries.
inline double loss(const Spectrum& y, const Spectrum& y_gt, const RealizedDft& z, const RealizedDft& z_gt,
                   double alpha, double beta) {
  if (y.size() != y_gt.size() || z.size() != z_gt.size()) throw ConfigError("loss: shape mismatch");
  return alpha * (y - y_gt).squaredNorm() / static_cast<double>(y.size()) +
         beta * (z - z_gt).squaredNorm() / static_cast<double>(z.size());
}

struct WindowTarget {
  Spectrum y;
  RealizedDft z;
};

namespace detail {

/// Backpropagates d(loss)/dy (and the z-loss) through one window, adding parameter
/// gradients into `g`. Returns d(loss)/d(past) (N_p x K) when attention is used.
inline RealMatrix backprop_window(const WindowTrace& tr, const ModelParams& p, const RealVector& grad_y,
                                  const RealVector& grad_z_direct, Gradients& g) {
  const int k = p.k();
  const double mu = p.hyper.mu;
  const Variant var = p.hyper.variant;
  RealVector g_ytilde;
  RealMatrix g_past;

  if (!uses_attention(var)) {
    g_ytilde = grad_y;
  } else {
    const RealVector active = (tr.pre_add.array() > 0.0).cast<double>();
    RealVector g_add, g_ctx;
    if (uses_gate(var)) {
      g_ytilde = grad_y.cwiseProduct(tr.gate);
      g_add = g_ytilde;
      const RealVector sum = tr.ytilde + tr.pre_add.cwiseMax(0.0);
      const RealVector g_gate_pre =
          grad_y.cwiseProduct(sum).cwiseProduct(tr.gate).cwiseProduct((1.0 - tr.gate.array()).matrix());
      g.V.noalias() += g_gate_pre * tr.context.transpose();
      g_ctx = p.V.transpose() * g_gate_pre;
    } else {
      g_ytilde = grad_y;
      g_add = grad_y;
      g_ctx = RealVector::Zero(k);
    }
    const RealVector g_pre = g_add.cwiseProduct(active);
    g.U.noalias() += g_pre * tr.context.transpose();
    g.b += g_pre;
    g_ctx.noalias() += p.U.transpose() * g_pre;

    // a = Y^T w, w = softmax(Y y~ / sqrt(K))
    const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(k));
    const RealVector g_w = tr.past * g_ctx;
    const RealVector g_scores = tr.weights.cwiseProduct((g_w.array() - tr.weights.dot(g_w)).matrix());
    g_ytilde.noalias() += tr.past.transpose() * g_scores * inv_sqrt_k;
    g_past = tr.weights * g_ctx.transpose() + g_scores * tr.ytilde.transpose() * inv_sqrt_k;
  }

  // y~_i = z_i^2 + z_{i+K}^2
  RealVector g_z = grad_z_direct;
  g_z.head(k).array() += 2.0 * tr.z.head(k).array() * g_ytilde.array();
  g_z.tail(k).array() += 2.0 * tr.z.tail(k).array() * g_ytilde.array();

  // Straight-through on the retained supports.
  const auto idx1 = realized_indices(tr.support1, k);
  const auto idx0 = realized_indices(tr.support0, k);
  RealVector g_v = RealVector::Zero(2 * k);
  for (int j : idx1) g_v[j] = g_z[j];

  RealVector g_z0;
  if (var == Variant::learn_s) {
    for (int j : idx1)
      for (int c : idx0) g.S(j, c) += g_v[j] * tr.z0[c];
    g_z0 = RealVector::Zero(2 * k);
    for (int c : idx0)
      for (int j : idx1) g_z0[c] += p.S(j, c) * g_v[j];
  } else {
    // v = u + z0 - W^T D W z0 / mu
    RealVector w_gv = RealVector::Zero(2 * k);
    for (int j : idx1) w_gv += p.W.col(j) * g_v[j];
    w_gv.array() *= tr.row_mask.array();
    for (int j : idx1) g.W.col(j).noalias() -= tr.wz0 * (g_v[j] / mu);
    for (int c : idx0) g.W.col(c).noalias() -= w_gv * (tr.z0[c] / mu);
    g_z0 = g_v;
    for (int c : idx0) g_z0[c] -= p.W.col(c).dot(w_gv) / mu;
  }

  RealVector g_u = g_v;
  for (int c : idx0) g_u[c] += g_z0[c];
  // u = W^T hbar / mu; only nonzero columns of g_u and nonzero rows of hbar contribute.
  for (int c = 0; c < 2 * k; ++c) {
    if (g_u[c] == 0.0) continue;
    g.W.col(c).noalias() += tr.hbar * (g_u[c] / mu);
  }
  return g_past;
}

}  // namespace detail

struct BackwardResult {
  double loss = 0.0;
  Gradients grads;
  Spectrum y;
  RealizedDft z;
};

/// Exact gradients of one window's loss with the buffer snapshot held constant.
inline BackwardResult backward(const CirWindow& window, const RealMatrix& past_snapshot, const ModelParams& p,
                               const WindowTarget& target, const TrainConfig& cfg,
                               const FrozenSupport* frozen = nullptr) {
  const WindowTrace tr = forward_traced(window, past_snapshot, p, frozen);
  BackwardResult out;
  out.grads = Gradients::zeros_like(p);
  out.loss = loss(tr.y, target.y, tr.z, target.z, cfg.alpha, cfg.beta);
  const RealVector gy = 2.0 * cfg.alpha * (tr.y - target.y) / static_cast<double>(tr.y.size());
  const RealVector gz = 2.0 * cfg.beta * (tr.z - target.z) / static_cast<double>(tr.z.size());
  detail::backprop_window(tr, p, gy, gz, out.grads);
  check_finite(out.grads);
  out.y = tr.y;
  out.z = tr.z;
  return out;
}

inline BackwardResult backward(const CirWindow& window, const PastBuffer& buf, const ModelParams& p,
                               const WindowTarget& target, const TrainConfig& cfg) {
  return backward(window, buf.matrix(), p, target, cfg);
}

struct SequenceLoss {
  double loss = 0.0;          // summed over windows that carry a target
  int counted = 0;
  Gradients grads;            // summed
  std::vector<Spectrum> outputs;
  std::vector<FrozenSupport> supports;
};

/// Forward and backward over a whole sequence. Windows whose target is absent
/// (std::nullopt) still run and feed the buffer but add nothing to the loss.
/// With detach_past the buffer enters each window as a constant; otherwise the
/// gradient also flows into earlier outputs through the attention keys/values.
inline SequenceLoss sequence_backward(const std::vector<CirWindow>& windows,
                                      const std::vector<std::optional<WindowTarget>>& targets, const ModelParams& p,
                                      const TrainConfig& cfg, bool detach_past,
                                      const std::vector<FrozenSupport>* frozen = nullptr) {
  const int k = p.k();
  const std::size_t n = windows.size();
  SequenceLoss out;
  out.grads = Gradients::zeros_like(p);
  std::vector<WindowTrace> traces;
  traces.reserve(n);
  PastBuffer buf(p.hyper.past, k);
  for (std::size_t t = 0; t < n; ++t) {
    traces.push_back(forward_traced(windows[t], buf.matrix(), p, frozen ? &(*frozen)[t] : nullptr));
    buf.push(traces.back().y);
    out.outputs.push_back(traces.back().y);
    out.supports.push_back({traces.back().support0, traces.back().support1});
  }

  std::vector<RealVector> carry(n, RealVector::Zero(k));
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t t = n - 1 - step;
    const WindowTrace& tr = traces[t];
    RealVector gy = carry[t];
    RealVector gz = RealVector::Zero(2 * k);
    if (targets[t]) {
      out.loss += loss(tr.y, targets[t]->y, tr.z, targets[t]->z, cfg.alpha, cfg.beta);
      ++out.counted;
      gy += 2.0 * cfg.alpha * (tr.y - targets[t]->y) / static_cast<double>(k);
      gz = 2.0 * cfg.beta * (tr.z - targets[t]->z) / static_cast<double>(2 * k);
    }
    if (gy.isZero(0.0) && gz.isZero(0.0)) continue;
    const RealMatrix g_past = detail::backprop_window(tr, p, gy, gz, out.grads);
    if (!detach_past && g_past.size() > 0) {
      for (Eigen::Index j = 0; j < g_past.rows(); ++j) {
        if (static_cast<std::size_t>(j) + 1 > t) break;  // zero bootstrap rows
        carry[t - 1 - static_cast<std::size_t>(j)] += g_past.row(j).transpose();
      }
    }
  }
  check_finite(out.grads);
  return out;
}

/// Loss of a sequence only (no gradients); optionally with frozen supports.
inline double sequence_loss(const std::vector<CirWindow>& windows,
                            const std::vector<std::optional<WindowTarget>>& targets, const ModelParams& p,
                            const TrainConfig& cfg, const std::vector<FrozenSupport>* frozen = nullptr) {
  PastBuffer buf(p.hyper.past, p.k());
  double total = 0.0;
  for (std::size_t t = 0; t < windows.size(); ++t) {
    const WindowTrace tr = forward_traced(windows[t], buf.matrix(), p, frozen ? &(*frozen)[t] : nullptr);
    buf.push(tr.y);
    if (targets[t]) total += loss(tr.y, targets[t]->y, tr.z, targets[t]->z, cfg.alpha, cfg.beta);
  }
  return total;
}

struct AdamState {
  Gradients m, v;
  std::uint64_t step = 0;

  static AdamState zeros_like(const ModelParams& p) { return {Gradients::zeros_like(p), Gradients::zeros_like(p), 0}; }
};

/// Adam with bias correction.
inline void adam_step(ModelParams& p, const Gradients& g, AdamState& s, double lr, const AdamConfig& cfg = {}) {
  ++s.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(s.step));
  Gradients& m = s.m;
  Gradients& v = s.v;
  auto update = [&](double* param, const double* grad, double* mm, double* vv, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) {
      mm[i] = cfg.beta1 * mm[i] + (1.0 - cfg.beta1) * grad[i];
      vv[i] = cfg.beta2 * vv[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
      const double mhat = mm[i] / c1;
      const double vhat = vv[i] / c2;
      param[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  };
  update(p.W.data(), g.W.data(), m.W.data(), v.W.data(), p.W.size());
  update(p.U.data(), g.U.data(), m.U.data(), v.U.data(), p.U.size());
  update(p.V.data(), g.V.data(), m.V.data(), v.V.data(), p.V.size());
  update(p.b.data(), g.b.data(), m.b.data(), v.b.data(), p.b.size());
  update(p.S.data(), g.S.data(), m.S.data(), v.S.data(), p.S.size());
}

// ---------------------------------------------------------------------------
// Data preparation

/// 1 / sqrt(K * mean power of the available samples); 1 when nothing is available or the power is zero.
inline double input_scale(const CirSequence& seq, int k) {
  double power = 0.0;
  int n = 0;
  for (Eigen::Index i = 0; i < seq.size(); ++i) {
    if (!seq.grid_mask[static_cast<std::size_t>(i)]) continue;
    power += std::norm(seq.samples[i]);
    ++n;
  }
  if (n == 0 || power <= 0) return 1.0;
  return 1.0 / std::sqrt(static_cast<double>(k) * power / n);
}

/// mu^2 / (2 mu - 1): with this input gain one LIHT step at W = R(F_K) returns the
/// DFT coefficients of a full window unchanged on the retained bins.
inline double model_input_gain(double mu) { return mu * mu / (2.0 * mu - 1.0); }

/// What the network sees for a masked, power-normalized window: the samples times
/// the gain above and times sqrt(K / m_t), which restores the full-window energy.
inline CirWindow model_input(const CirWindow& w, const Hyper& h) {
  CirWindow out = w;
  const int m = count_true(w.mask);
  if (m == 0) return out;
  out.values *= model_input_gain(h.mu) * std::sqrt(static_cast<double>(w.mask.size()) / m);
  return out;
}

inline std::vector<CirWindow> model_inputs(const std::vector<CirWindow>& ws, const Hyper& h) {
  std::vector<CirWindow> out;
  out.reserve(ws.size());
  for (const auto& w : ws) out.push_back(model_input(w, h));
  return out;
}

/// A sequence ready for training or evaluation: scaled full windows and IHT targets.
struct PreparedSequence {
  std::string label;
  double scale = 1.0;
  std::vector<CirWindow> windows;                       // full, scaled
  std::vector<std::optional<WindowTarget>> targets;     // nullopt for all-zero ground truth
  GroundTruth gt;
};

inline PreparedSequence prepare_sequence(const CirSequence& seq, int k, int shift,
                                         const IhtOptions& gt_opt = converged_iht_options()) {
  PreparedSequence ps;
  ps.label = seq.meta.config.label;
  CirSequence full = seq;
  full.grid_mask.assign(static_cast<std::size_t>(seq.size()), true);
  ps.scale = input_scale(full, k);
  full.samples *= ps.scale;
  ps.gt = ground_truth_spectrogram(full, k, shift, gt_opt);
  ps.windows = frame_windows(full, k, shift);
  for (std::size_t t = 0; t < ps.windows.size(); ++t) {
    if (ps.gt.raw_power[t].maxCoeff() <= 0.0) ps.targets.emplace_back(std::nullopt);
    else ps.targets.emplace_back(WindowTarget{ps.gt.spectra[t], ps.gt.dft[t]});
  }
  return ps;
}

struct HistoryEntry {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  ModelParams params;
  AdamState optimizer;
  std::vector<HistoryEntry> history;
};

class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& what, TrainResult last_good)
      : NumericError(what), last_good_(std::move(last_good)) {}
  const TrainResult& last_good() const { return last_good_; }

 private:
  TrainResult last_good_;
};

/// Mean per-window loss of the prepared sequences under per-window random masks.
inline double evaluate_loss(const std::vector<PreparedSequence>& data, const ModelParams& p, const TrainConfig& cfg,
                            std::uint64_t seed) {
  Rng rng(seed);
  double total = 0.0;
  int count = 0;
  for (const auto& ps : data) {
    std::vector<CirWindow> masked;
    masked.reserve(ps.windows.size());
    for (const auto& w : ps.windows)
      masked.push_back(model_input(apply_mask(w, gen_window_mask(p.k(), cfg.p_max, rng)), p.hyper));
    total += sequence_loss(masked, ps.targets, p, cfg);
    for (const auto& t : ps.targets) count += t ? 1 : 0;
  }
  return count > 0 ? total / count : 0.0;
}

using EpochCallback = std::function<void(const TrainResult&)>;

/// One optimizer step per sequence; fresh per-window masks with p ~ U(0, p_max);
/// sequences whose label appears in cfg.oversample are repeated that many times per epoch.
inline TrainResult train(const std::vector<PreparedSequence>& train_set, const std::vector<PreparedSequence>& val_set,
                         const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (train_set.empty()) throw ConfigError("training set is empty");
  const int k = cfg.hyper.window_len;
  for (const auto& ps : train_set)
    if (!ps.windows.empty() && ps.windows.front().values.size() != k)
      throw ConfigError("training data window length differs from model K");

  TrainResult res;
  res.params = param_init(cfg.hyper, cfg.seed);
  res.optimizer = AdamState::zeros_like(res.params);
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<std::size_t> schedule;
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    int copies = 1;
    if (auto it = cfg.oversample.find(train_set[i].label); it != cfg.oversample.end()) copies = it->second;
    for (int c = 0; c < copies; ++c) schedule.push_back(i);
  }

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(schedule.begin(), schedule.end(), rng);
    double epoch_loss = 0.0;
    int epoch_count = 0;
    for (std::size_t idx : schedule) {
      const PreparedSequence& ps = train_set[idx];
      std::vector<CirWindow> masked;
      masked.reserve(ps.windows.size());
      for (const auto& w : ps.windows)
        masked.push_back(model_input(apply_mask(w, gen_window_mask(k, cfg.p_max, rng)), cfg.hyper));
      SequenceLoss sl;
      try {
        sl = sequence_backward(masked, ps.targets, res.params, cfg, cfg.detach_past);
      } catch (const NumericError& e) {
        throw TrainingAborted(std::string("epoch ") + std::to_string(epoch) + ": " + e.what(), res);
      }
      if (sl.counted == 0) continue;
      if (!std::isfinite(sl.loss))
        throw TrainingAborted("non-finite loss in epoch " + std::to_string(epoch) + " on sequence " +
                                  std::to_string(idx),
                              res);
      sl.grads *= 1.0 / sl.counted;
      adam_step(res.params, sl.grads, res.optimizer, cfg.lr, cfg.adam);
      epoch_loss += sl.loss;
      epoch_count += sl.counted;
    }
    HistoryEntry h;
    h.epoch = epoch;
    h.train_loss = epoch_count > 0 ? epoch_loss / epoch_count : 0.0;
    h.val_loss = val_set.empty() ? 0.0 : evaluate_loss(val_set, res.params, cfg, cfg.seed + 1000003ULL);
    res.history.push_back(h);
    if (on_epoch) on_epoch(res);
  }
  return res;
}

/// Splits sequences into train/val/test by sequence, after a seeded shuffle.
template <typename T>
std::array<std::vector<T>, 3> split_dataset(std::vector<T> items, double train_frac, double val_frac,
                                            std::uint64_t seed) {
  Rng rng(seed);
  std::shuffle(items.begin(), items.end(), rng);
  const auto n = items.size();
  auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
  auto n_val = static_cast<std::size_t>(std::llround(val_frac * static_cast<double>(n)));
  n_train = std::min(n_train, n);
  n_val = std::min(n_val, n - n_train);
  std::array<std::vector<T>, 3> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = i < n_train ? out[0] : (i < n_train + n_val ? out[1] : out[2]);
    dst.push_back(std::move(items[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite-difference gradient check

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::map<std::string, double> per_tensor;
  int checked = 0;
};

/// Central differences on every learnable entry with the thresholding supports frozen.
/// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-6); the floor sits
/// near the rounding noise of a central difference at eps = 1e-5 on an O(1) loss.
inline GradCheckResult gradient_check(const std::vector<CirWindow>& windows,
                                      const std::vector<std::optional<WindowTarget>>& targets, ModelParams p,
                                      const TrainConfig& cfg, bool detach_past, double eps = 1e-5) {
  const SequenceLoss base = sequence_backward(windows, targets, p, cfg, detach_past);
  const std::vector<FrozenSupport> frozen = base.supports;

  // With detached history the reference loss sees each buffer as a constant input.
  std::vector<RealMatrix> snapshots;
  if (detach_past) {
    PastBuffer buf(p.hyper.past, p.k());
    for (const auto& y : base.outputs) {
      snapshots.push_back(buf.matrix());
      buf.push(y);
    }
  }
  auto eval = [&](const ModelParams& q) {
    if (!detach_past) return sequence_loss(windows, targets, q, cfg, &frozen);
    double total = 0.0;
    for (std::size_t t = 0; t < windows.size(); ++t) {
      if (!targets[t]) continue;
      const WindowTrace tr = forward_traced(windows[t], snapshots[t], q, &frozen[t]);
      total += loss(tr.y, targets[t]->y, tr.z, targets[t]->z, cfg.alpha, cfg.beta);
    }
    return total;
  };

  GradCheckResult res;
  Gradients analytic = base.grads;
  auto check = [&](const char* name, double* param, const double* grad, Eigen::Index n) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double saved = param[i];
      param[i] = saved + eps;
      const double up = eval(p);
      param[i] = saved - eps;
      const double down = eval(p);
      param[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double denom = std::max({std::abs(grad[i]), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(grad[i] - numeric) / denom);
      ++res.checked;
    }
    if (n > 0) res.per_tensor[name] = worst;
    if (worst > res.max_rel_error) {
      res.max_rel_error = worst;
      res.worst_tensor = name;
    }
  };
  visit_tensors(p, analytic, [&](const char* name, double* a, const double* g, Eigen::Index n) {
    if (p.hyper.variant == Variant::no_attention && std::string(name) != "W") return;
    check(name, a, g, n);
  });
  return res;
}

}  // namespace star
