// star_cli: synthesis, training, reconstruction, evaluation, benchmarking and
// gradient checks for the STAR reconstructor.
//
// Exit codes: 0 success, 1 usage/configuration error, 2 acceptance or tolerance
// breach, 3 numerical abort during training, 4 I/O or format error.

#include "star/star.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitBreach = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::optional<std::string> ablation;
  std::optional<int> past;
  std::string missing;
  bool assert_acceptance = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON run configuration");
  cmd->add_option("--seed", c.seed, "seed override for this command");
  cmd->add_option("--threads", c.threads, "worker threads (1 = bit-exact)")->check(CLI::PositiveNumber);
  cmd->add_option("--ablation", c.ablation, "none|no-attention|only-add|learn-s");
  cmd->add_option("--np", c.past, "number of past spectra in the attention buffer")->check(CLI::PositiveNumber);
  cmd->add_option("--missing", c.missing, "comma-separated missing fractions");
  cmd->add_flag("--assert-acceptance", c.assert_acceptance, "exit nonzero when the acceptance check fails");
}

star::RunConfig resolve(const Common& c) {
  star::RunConfig cfg = c.config_path.empty() ? star::RunConfig{} : star::load_run_config(c.config_path);
  if (c.ablation) cfg.train.hyper.variant = star::parse_variant(*c.ablation);
  if (c.past) cfg.train.hyper.past = *c.past;
  if (!c.missing.empty()) {
    std::vector<double> fr;
    std::stringstream ss(c.missing);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        fr.push_back(std::stod(tok));
      } catch (const std::logic_error&) {
        throw star::ConfigError("bad missing fraction: " + tok);
      }
    }
    cfg.eval.fractions = fr;
  }
  cfg.train.hyper.window_len = cfg.synth.window_len;
  cfg.train.window_shift = cfg.synth.window_shift;
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  star::detail::write_file(path.string(), bytes);
}

/// Resolved configuration (replayable with --config) and a run manifest next to the outputs.
void record_run(const fs::path& dir, const std::string& stem, const std::string& command, const star::RunConfig& cfg,
                const json& extra) {
  write_text(dir / (stem + ".config.json"), star::to_json(cfg).dump(2) + "\n");
  json m = {{"command", command}, {"config", star::to_json(cfg)}, {"run", extra}};
  write_text(dir / (stem + ".manifest.json"), m.dump(2) + "\n");
}

fs::path parent_or_dot(const fs::path& p) { return p.has_parent_path() ? p.parent_path() : fs::path("."); }

struct Dataset {
  std::vector<star::CirSequence> sequences;
  std::vector<std::string> files;
};

Dataset load_dataset(const fs::path& dir) {
  const fs::path manifest = dir / "manifest.json";
  std::ifstream in(manifest);
  if (!in) throw std::runtime_error("cannot open data manifest " + manifest.string());
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw star::FormatError("bad data manifest " + manifest.string() + ": " + e.what(), 0);
  }
  Dataset d;
  for (const auto& f : m.at("files")) {
    const std::string name = f.at("file").get<std::string>();
    d.sequences.push_back(star::load_cir((dir / name).string()));
    d.files.push_back(name);
  }
  return d;
}

std::array<std::vector<star::CirSequence>, 3> split(const star::RunConfig& cfg, std::vector<star::CirSequence> seqs) {
  const double train_frac = 1.0 - cfg.eval.test_fraction - cfg.eval.val_fraction;
  if (train_frac < 0) throw star::ConfigError("test_fraction + val_fraction exceeds 1");
  return star::split_dataset(std::move(seqs), train_frac, cfg.eval.val_fraction, cfg.eval.split_seed);
}

std::vector<star::PreparedSequence> prepare_all(const std::vector<star::CirSequence>& seqs, const star::RunConfig& cfg,
                                                int threads) {
  std::vector<star::PreparedSequence> out(seqs.size());
  star::IhtOptions gt = star::converged_iht_options();
  gt.sparsity = cfg.train.hyper.sparsity;
  gt.mu = cfg.train.hyper.mu;
  gt.max_iter = cfg.eval.iht_max_iter;
  gt.tol = cfg.eval.tol;
  star::detail::parallel_for(seqs.size(), threads, [&](std::size_t i) {
    out[i] = star::prepare_sequence(seqs[i], cfg.train.hyper.window_len, cfg.train.window_shift, gt);
  });
  return out;
}

// ---------------------------------------------------------------------------

int cmd_synth(const Common& c, const std::string& out_dir, std::optional<int> n_seq, std::optional<int> n_win) {
  star::RunConfig cfg = resolve(c);
  if (c.seed) cfg.synth.seed = *c.seed;
  if (n_seq) cfg.n_sequences = *n_seq;
  if (n_win) cfg.n_windows = *n_win;
  if (cfg.n_sequences < 0) throw star::ConfigError("n_sequences must be >= 0");
  cfg.synth.validate();
  fs::create_directories(out_dir);

  json files = json::array();
  std::vector<star::CirSequence> seqs(static_cast<std::size_t>(cfg.n_sequences));
  star::detail::parallel_for(seqs.size(), c.threads, [&](std::size_t i) {
    star::SynthConfig sc = cfg.synth;
    sc.seed = cfg.synth.seed + i;
    seqs[i] = star::synth_sequence(sc, cfg.n_windows);
  });
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "seq_%04zu.cir", i);
    star::save_cir((fs::path(out_dir) / name).string(), seqs[i]);
    files.push_back({{"file", name}, {"seed", seqs[i].meta.config.seed}, {"label", seqs[i].meta.config.label},
                     {"n_windows", cfg.n_windows}});
  }
  json manifest = {{"files", files}, {"config", star::to_json(cfg)}};
  write_text(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
  record_run(out_dir, "synth", "synth", cfg, {{"n_sequences", cfg.n_sequences}, {"seed", cfg.synth.seed}});
  std::cout << "wrote " << cfg.n_sequences << " sequences to " << out_dir << "\n";
  return 0;
}

int cmd_train(const Common& c, const std::string& data_dir, const std::string& out, std::optional<int> epochs) {
  star::RunConfig cfg = resolve(c);
  if (c.seed) cfg.train.seed = *c.seed;
  if (epochs) cfg.train.epochs = *epochs;
  cfg.train.validate();

  Dataset data = load_dataset(data_dir);
  auto parts = split(cfg, std::move(data.sequences));
  const auto train_set = prepare_all(parts[0], cfg, c.threads);
  const auto val_set = prepare_all(parts[1], cfg, c.threads);
  std::cout << "train sequences: " << train_set.size() << ", validation sequences: " << val_set.size()
            << ", parameters: " << star::count_params(cfg.train.hyper.window_len, cfg.train.hyper.variant) << "\n";

  const fs::path out_path(out);
  const fs::path dir = parent_or_dot(out_path);
  fs::create_directories(dir);
  auto to_checkpoint = [&](const star::TrainResult& r) {
    star::Checkpoint ck;
    ck.params = r.params;
    ck.optimizer = r.optimizer;
    ck.meta = {{"config", star::to_json(cfg)}, {"data", fs::path(data_dir).filename().string()}};
    return ck;
  };
  auto history_csv = [](const star::TrainResult& r) {
    std::string s = "epoch,train_loss,val_loss\n";
    for (const auto& h : r.history)
      s += std::to_string(h.epoch) + "," + star::format_double(h.train_loss) + "," +
           star::format_double(h.val_loss) + "\n";
    return s;
  };

  star::TrainResult res;
  try {
    res = star::train(train_set, val_set, cfg.train, [](const star::TrainResult& r) {
      const auto& h = r.history.back();
      std::cout << "epoch " << h.epoch << " train_loss " << star::format_double(h.train_loss) << " val_loss "
                << star::format_double(h.val_loss) << "\n";
    });
  } catch (const star::TrainingAborted& e) {
    const fs::path keep = out_path.string() + ".last_good";
    star::save_checkpoint(keep.string(), to_checkpoint(e.last_good()));
    write_text(out_path.string() + ".history.csv", history_csv(e.last_good()));
    std::cerr << "training aborted: " << e.what() << "\nlast good checkpoint: " << keep.string() << "\n";
    return kExitNumeric;
  }
  star::save_checkpoint(out, to_checkpoint(res));
  write_text(out_path.string() + ".history.csv", history_csv(res));
  record_run(dir, out_path.filename().string(), "train", cfg,
             {{"data", data_dir}, {"checkpoint", out_path.filename().string()}, {"seed", cfg.train.seed}});
  if (!res.history.empty())
    std::cout << "final train_loss " << star::format_double(res.history.back().train_loss) << " val_loss "
              << star::format_double(res.history.back().val_loss) << "\n";
  return 0;
}

int cmd_reconstruct(const Common& c, const std::string& checkpoint, const std::string& input, const std::string& out) {
  star::RunConfig cfg = resolve(c);
  if (c.seed) cfg.eval.seed = *c.seed;
  const double frac = cfg.eval.fractions.empty() ? 0.0 : cfg.eval.fractions.front();
  if (!(frac >= 0.0 && frac < 1.0)) throw star::ConfigError("missing fraction must lie in [0, 1)");
  const int k = cfg.synth.window_len;
  const int shift = cfg.synth.window_shift;
  const star::Checkpoint ck = star::load_checkpoint(checkpoint, k);
  const star::CirSequence seq = star::load_cir(input);

  star::Rng rng(cfg.eval.seed);
  star::CirSequence masked = star::with_grid_mask(seq, star::gen_grid_mask(seq.size(), k, shift, frac, rng));
  masked.samples *= star::input_scale(masked, k);
  const auto spectra = star::star_forward_sequence(star::model_inputs(star::frame_windows(masked, k, shift), ck.params.hyper), ck.params);

  star::IhtOptions gt_opt = star::converged_iht_options();
  gt_opt.sparsity = ck.params.hyper.sparsity;
  gt_opt.mu = ck.params.hyper.mu;
  gt_opt.max_iter = cfg.eval.iht_max_iter;
  gt_opt.tol = cfg.eval.tol;
  const auto oracle = star::ground_truth_spectrogram(seq, k, shift, gt_opt).spectra;

  const fs::path prefix(out);
  const fs::path dir = parent_or_dot(prefix);
  fs::create_directories(dir);
  write_text(prefix.string() + ".csv", star::spectrogram_csv(spectra));
  write_bytes(prefix.string() + ".pgm", star::spectrogram_pgm(spectra));
  write_bytes(prefix.string() + ".oracle.pgm", star::spectrogram_pgm(oracle));
  json run = {{"checkpoint", checkpoint}, {"input", input}, {"missing_fraction", frac}, {"seed", cfg.eval.seed}};
  cfg.eval.fractions = {frac};
  record_run(dir, prefix.filename().string(), "reconstruct", cfg, run);
  const auto norm = star::clip_unit(spectra);
  std::cout << "windows " << spectra.size() << " rmse_vs_oracle " << star::format_double(star::rmse(norm, oracle))
            << "\n";
  return 0;
}

int cmd_eval(const Common& c, const std::vector<std::string>& checkpoints, const std::string& data_dir,
             const std::string& out, const std::vector<std::string>& methods, bool no_timing) {
  star::RunConfig cfg = resolve(c);
  if (c.seed) cfg.eval.seed = *c.seed;
  if (!methods.empty()) cfg.eval.methods = methods;
  const int k = cfg.synth.window_len;

  std::map<std::string, star::ModelParams> models;
  for (const auto& spec : checkpoints) {
    const auto eq = spec.find('=');
    const std::string name = eq == std::string::npos ? "star" : spec.substr(0, eq);
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    models[name] = star::load_checkpoint(path, k).params;
  }

  Dataset data = load_dataset(data_dir);
  auto parts = split(cfg, std::move(data.sequences));
  if (parts[2].empty()) throw star::ConfigError("test split is empty");

  star::SweepOptions opt;
  opt.fractions = cfg.eval.fractions;
  opt.methods = cfg.eval.methods;
  opt.window_len = k;
  opt.window_shift = cfg.synth.window_shift;
  opt.iht = star::converged_iht_options();
  opt.iht.sparsity = cfg.train.hyper.sparsity;
  opt.iht.mu = cfg.train.hyper.mu;
  opt.iht.max_iter = cfg.eval.iht_max_iter;
  opt.iht.tol = cfg.eval.tol;
  opt.seed = cfg.eval.seed;
  opt.threads = c.threads;
  opt.timing = !no_timing;
  const star::SweepResult res = star::sweep_missing(parts[2], opt, models);
  const std::string csv = star::sweep_csv(res);

  const fs::path out_path(out);
  const fs::path dir = parent_or_dot(out_path);
  fs::create_directories(dir);
  write_text(out_path, csv);
  record_run(dir, out_path.filename().string(), "eval", cfg,
             {{"data", data_dir}, {"checkpoints", checkpoints}, {"timing", !no_timing}});
  std::cout << csv;

  if (c.assert_acceptance) {
    bool ok = true;
    try {
      const double star_rmse = res.find("star", 0.9).rmse;
      for (const char* base : {"iht", "iht-1"}) {
        const double b = res.find(base, 0.9).rmse;
        const bool pass = star_rmse < b;
        std::cout << (pass ? "PASS" : "FAIL") << " star rmse " << star::format_double(star_rmse) << " < " << base
                  << " rmse " << star::format_double(b) << " at 0.9 missing\n";
        ok = ok && pass;
      }
    } catch (const star::ConfigError& e) {
      std::cerr << "acceptance check needs star, iht and iht-1 at 0.9 missing: " << e.what() << "\n";
      return kExitBreach;
    }
    if (!ok) return kExitBreach;
  }
  return 0;
}

int cmd_bench(const Common& c, const std::string& checkpoint, int n_windows) {
  star::RunConfig cfg = resolve(c);
  star::BenchOptions opt;
  if (c.seed) opt.seed = *c.seed;
  opt.n_windows = n_windows;
  if (!c.missing.empty()) opt.missing_fraction = cfg.eval.fractions.front();
  const int k = cfg.synth.window_len;
  star::ModelParams p = checkpoint.empty() ? star::param_init(cfg.train.hyper, cfg.train.seed)
                                           : star::load_checkpoint(checkpoint, k).params;
  star::SynthConfig sc = cfg.synth;
  sc.seed = opt.seed;
  const star::CirSequence seq = star::synth_sequence(sc, 2 * n_windows + 1);
  star::IhtOptions iht = star::converged_iht_options();
  iht.sparsity = p.hyper.sparsity;
  iht.mu = p.hyper.mu;
  iht.max_iter = cfg.eval.iht_max_iter;
  iht.tol = cfg.eval.tol;
  const star::BenchResult r = star::bench_runtime(seq, p, opt, iht);

  std::cout << "parameters " << star::count_params(k, p.hyper.variant) << " (K=" << k << ", variant "
            << star::to_string(p.hyper.variant) << ")\n"
            << "missing_fraction " << star::format_double(opt.missing_fraction) << "\n"
            << "method,median_ms_per_window\n"
            << "star," << star::format_double(r.star_ms) << "\n"
            << "iht-1," << star::format_double(r.iht1_ms) << "\n"
            << "iht," << star::format_double(r.iht_ms) << "\n"
            << "iht_median_iterations " << star::format_double(r.iht_median_iterations) << "\n"
            << "speedup_iht_over_star " << star::format_double(r.speedup) << "\n"
            << "available,star_ms\n";
  for (const auto& [m, t] : r.star_vs_available) std::cout << m << "," << star::format_double(t) << "\n";
  std::cout << "linear_fit slope_ms " << star::format_double(r.slope_ms) << " intercept_ms "
            << star::format_double(r.intercept_ms) << " r2 " << star::format_double(r.r_squared) << "\n";
  const bool fast = r.star_ms * 5.0 <= r.iht_ms;
  const bool iters = r.iht_median_iterations >= 15.0;
  std::cout << (fast ? "PASS" : "FAIL") << " star median <= iht median / 5\n"
            << (iters ? "PASS" : "FAIL") << " iht median iterations >= 15\n";
  const bool ok = fast && iters;
  return ok ? 0 : kExitBreach;
}

int cmd_gradcheck(const Common& c, const std::vector<int>& ks, double tol, bool bptt) {
  star::RunConfig cfg = resolve(c);
  const std::uint64_t seed = c.seed.value_or(cfg.train.seed);
  bool ok = true;
  std::cout << "k,variant,detach_past,checked,max_rel_error,worst_tensor\n";
  for (int k : ks) {
    star::Hyper h = cfg.train.hyper;
    h.window_len = k;
    h.sparsity = std::min(2, k);
    h.past = std::min(h.past, 3);
    star::ModelParams p = star::param_init(h, seed);
    star::Rng rng(seed + static_cast<std::uint64_t>(k));
    std::normal_distribution<double> g(0.0, 1.0);
    // Perturb W away from the DFT so every term of the gradient is exercised.
    p.W += 0.05 * star::RealMatrix::NullaryExpr(2 * k, 2 * k, [&] { return g(rng); });
    std::vector<star::CirWindow> windows;
    std::vector<std::optional<star::WindowTarget>> targets;
    for (int t = 0; t < 4; ++t) {
      star::CirWindow w;
      w.values = star::ComplexVector::NullaryExpr(k, [&] { return star::cdouble(g(rng), g(rng)); });
      w.mask = star::gen_window_mask(k, 0.5, rng);
      w = star::apply_mask(w, w.mask);
      w.index = t;
      windows.push_back(w);
      star::WindowTarget tg{star::Spectrum::NullaryExpr(k, [&] { return std::abs(g(rng)); }),
                            star::RealVector::NullaryExpr(2 * k, [&] { return g(rng); })};
      targets.emplace_back(tg);
    }
    for (bool detach : bptt ? std::vector<bool>{true, false} : std::vector<bool>{true}) {
      const auto r = star::gradient_check(windows, targets, p, cfg.train, detach);
      const bool pass = r.max_rel_error < tol;
      ok = ok && pass;
      std::cout << k << "," << star::to_string(h.variant) << "," << (detach ? "true" : "false") << "," << r.checked
                << "," << star::format_double(r.max_rel_error) << "," << r.worst_tensor << "\n";
    }
  }
  std::cout << (ok ? "PASS" : "FAIL") << " max relative error < " << star::format_double(tol) << "\n";
  return ok ? 0 : kExitBreach;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STAR micro-Doppler reconstruction"};
  app.require_subcommand(1);

  Common common;

  auto* synth = app.add_subcommand("synth", "generate synthetic CIR sequences");
  add_common(synth, common);
  std::string synth_out;
  std::optional<int> n_seq, n_win;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--n-sequences", n_seq, "number of sequences");
  synth->add_option("--n-windows", n_win, "windows per sequence");

  auto* train = app.add_subcommand("train", "train a STAR model");
  add_common(train, common);
  std::string train_data, train_out;
  std::optional<int> epochs;
  train->add_option("--data", train_data, "directory written by synth")->required();
  train->add_option("--out", train_out, "checkpoint path")->required();
  train->add_option("--epochs", epochs, "override epoch count");

  auto* recon = app.add_subcommand("reconstruct", "reconstruct one CIR file with a checkpoint");
  add_common(recon, common);
  std::string recon_ck, recon_in, recon_out;
  recon->add_option("--checkpoint", recon_ck)->required();
  recon->add_option("--input", recon_in, "CIR file (.cir binary or .csv)")->required();
  recon->add_option("--out", recon_out, "output prefix")->required();

  auto* eval = app.add_subcommand("eval", "missing-measurement sweep");
  add_common(eval, common);
  std::vector<std::string> eval_ck, eval_methods;
  std::string eval_data, eval_out;
  bool no_timing = false;
  eval->add_option("--checkpoint", eval_ck, "checkpoint path, or name=path for extra learned methods");
  eval->add_option("--data", eval_data, "directory written by synth")->required();
  eval->add_option("--out", eval_out, "sweep CSV path")->required();
  eval->add_option("--methods", eval_methods, "methods to evaluate")->delimiter(',');
  eval->add_flag("--no-timing", no_timing, "write 0 for wall-clock columns (byte-stable output)");

  auto* bench = app.add_subcommand("bench", "runtime benchmark");
  add_common(bench, common);
  std::string bench_ck;
  int bench_windows = 200;
  bench->add_option("--checkpoint", bench_ck, "checkpoint (default: fresh initialization)");
  bench->add_option("--windows", bench_windows, "windows in the benchmark stream")->check(CLI::PositiveNumber);

  auto* grad = app.add_subcommand("gradcheck", "finite-difference gradient check");
  add_common(grad, common);
  std::vector<int> grad_k{4, 8};
  double grad_tol = 1e-4;
  bool grad_bptt = false;
  grad->add_option("--k", grad_k, "window lengths")->delimiter(',');
  grad->add_option("--tol", grad_tol, "maximum relative error");
  grad->add_flag("--bptt", grad_bptt, "also check gradients through past outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(common, synth_out, n_seq, n_win);
    if (*train) return cmd_train(common, train_data, train_out, epochs);
    if (*recon) return cmd_reconstruct(common, recon_ck, recon_in, recon_out);
    if (*eval) return cmd_eval(common, eval_ck, eval_data, eval_out, eval_methods, no_timing);
    if (*bench) return cmd_bench(common, bench_ck, bench_windows);
    if (*grad) return cmd_gradcheck(common, grad_k, grad_tol, grad_bptt);
  } catch (const star::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const star::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitIo;
  } catch (const star::NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
