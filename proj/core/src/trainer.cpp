#include "pnnp/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "pnnp/distribution.hpp"
#include "pnnp/stats.hpp"

namespace pnnp {

double lr_schedule(int step, int total_steps, const TrainConfig& cfg) {
  if (step < 0 || step >= total_steps)
    throw std::invalid_argument("lr_schedule: step out of range");
  if (total_steps == 1) return cfg.lr_base;
  const double t = static_cast<double>(step) / static_cast<double>(total_steps - 1);
  return cfg.lr_min + 0.5 * (cfg.lr_base - cfg.lr_min) * (1.0 + std::cos(M_PI * t));
}

void adam_step(std::vector<double>& params, std::span<const double> grads,
               AdamState& state, double lr, const TrainConfig& cfg) {
  if (params.size() != grads.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size())
    throw std::invalid_argument("adam_step: state shape mismatch");
  for (double g : grads)
    if (!std::isfinite(g))
      throw std::runtime_error("adam_step: non-finite gradient, step aborted");

  state.step += 1;
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * grads[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * grads[i] * grads[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
  }
}

std::vector<TrainLogEntry> train(ProxyModel& model,
                                 const std::map<int, PixelNoiseSamples>& pools,
                                 const TrainConfig& cfg) {
  if (cfg.steps_per_iso <= 0) throw std::invalid_argument("train: steps_per_iso must be > 0");
  if (!(cfg.lr_min < cfg.lr_base))
    throw std::invalid_argument("train: lr_min must be below lr_base");
  for (int iso : model.isos) {
    const auto it = pools.find(iso);
    if (it == pools.end() || it->second.samples.empty())
      throw std::invalid_argument("train: empty pool for iso " + std::to_string(iso));
    if (cfg.patch > it->second.samples.size() * 64)
      throw std::invalid_argument("train: patch far exceeds pool for iso " +
                                  std::to_string(iso));
  }

  std::vector<double> params = pack_parameters(model);
  AdamState state;
  std::vector<TrainLogEntry> log;
  log.reserve(static_cast<std::size_t>(cfg.steps_per_iso) * model.isos.size());

  std::vector<double> target(cfg.patch), n1(cfg.patch), n2(cfg.patch);
  for (int round = 0; round < cfg.steps_per_iso; ++round) {
    const double lr = lr_schedule(round, cfg.steps_per_iso, cfg);
    for (int iso : model.isos) {
      const std::string tag = "train/iso=" + std::to_string(iso) +
                              "/round=" + std::to_string(round);
      RandomStream pick(derive_seed(cfg.seed, tag + "/target"));
      RandomStream rn1(derive_seed(cfg.seed, tag + "/n1"));
      RandomStream rn2(derive_seed(cfg.seed, tag + "/n2"));
      RandomStream rq(derive_seed(cfg.seed, tag + "/queries"));

      const std::vector<double>& pool = pools.at(iso).samples;
      for (std::size_t i = 0; i < cfg.patch; ++i)
        target[i] = pool[pick.next_u64() % pool.size()];
      for (std::size_t i = 0; i < cfg.patch; ++i) n1[i] = rn1.normal();
      for (std::size_t i = 0; i < cfg.patch; ++i) n2[i] = rn2.normal();

      const SortedSamples real = SortedSamples::from(target);
      const double scale = stddev(target);
      const QuerySet qs = sample_queries(cfg.queries_per_step, scale,
                                         cfg.query_perturb_std, cfg.query_clip, rq);

      const std::vector<double> out = forward(model, n1, n2, iso);
      const DdlResult loss = ddl_loss(out, real, qs, true);
      const std::vector<double> grads = backward(model, n1, n2, iso, loss.grad);

      adam_step(params, grads, state, lr, cfg);
      unpack_parameters(model, params);
      log.push_back({round, iso, loss.cdf_term, loss.quantile_term, lr});
    }
  }
  return log;
}

void write_train_log(const std::vector<TrainLogEntry>& log, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_train_log: cannot open " + path);
  out << "step,iso,L_cdf,L_quantile,lr\n";
  char buf[160];
  for (const TrainLogEntry& e : log) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g\n", e.step, e.iso,
                  e.l_cdf, e.l_quantile, e.lr);
    out << buf;
  }
}

GradCheckResult grad_check(const ProxyModel& model, const GradCheckInput& input,
                           const QuerySet& queries, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("grad_check: eps must be > 0");
  const SortedSamples real = SortedSamples::from(input.target);

  ProxyModel probe = model;
  std::vector<double> params = pack_parameters(model);

  const std::vector<double> out = forward(probe, input.n1, input.n2, input.iso);
  const DdlResult base = ddl_loss(out, real, queries, true);
  const std::vector<double> analytic = backward(probe, input.n1, input.n2,
                                                input.iso, base.grad);

  auto loss_at = [&](std::size_t j, double value, std::uint64_t& signature) {
    const double saved = params[j];
    params[j] = value;
    unpack_parameters(probe, params);
    const std::vector<double> o = forward(probe, input.n1, input.n2, input.iso);
    const DdlResult r = ddl_loss(o, real, queries, false);
    params[j] = saved;
    signature = r.kink_signature;
    return r.total;
  };

  GradCheckResult res;
  for (std::size_t j = 0; j < params.size(); ++j) {
    // Central differences at eps and eps/2 with Richardson extrapolation:
    // the CDF interpolation is rational in the samples, so plain central
    // differences carry an eps^2 curvature term that the extrapolation
    // cancels. Disagreement between the two stencils beyond that model
    // means the probe straddles a kink; skip those parameters.
    std::uint64_t sig[4] = {};
    const double lp1 = loss_at(j, params[j] + eps, sig[0]);
    const double lm1 = loss_at(j, params[j] - eps, sig[1]);
    const double lp2 = loss_at(j, params[j] + 0.5 * eps, sig[2]);
    const double lm2 = loss_at(j, params[j] - 0.5 * eps, sig[3]);
    if (sig[0] != sig[1] || sig[0] != sig[2] || sig[0] != sig[3]) {
      ++res.skipped_kink;
      continue;
    }
    const double fd1 = (lp1 - lm1) / (2.0 * eps);
    const double fd2 = (lp2 - lm2) / eps;
    const double fd = fd2 + (fd2 - fd1) / 3.0;
    const double denom = std::max(std::abs(analytic[j]), std::abs(fd));
    if (denom < 1e-7) {
      ++res.skipped_zero;
      continue;
    }
    if (std::abs(fd1 - fd2) > 0.05 * denom) {
      ++res.skipped_kink;
      continue;
    }
    const double rel = std::abs(analytic[j] - fd) / denom;
    res.max_rel_error = std::max(res.max_rel_error, rel);
    ++res.checked;
  }
  unpack_parameters(probe, params);
  return res;
}

GradCheckInput make_grad_check_input(std::size_t count, int iso, double target_sigma,
                                     std::uint64_t seed) {
  GradCheckInput in;
  in.iso = iso;
  RandomStream rt(derive_seed(seed, "gradcheck/target"));
  RandomStream r1(derive_seed(seed, "gradcheck/n1"));
  RandomStream r2(derive_seed(seed, "gradcheck/n2"));
  const GaussianMixture dist = GaussianMixture::long_tailed(target_sigma);
  in.target.resize(count);
  in.n1.resize(count);
  in.n2.resize(count);
  for (std::size_t i = 0; i < count; ++i) in.target[i] = dist.sample(rt);
  for (std::size_t i = 0; i < count; ++i) in.n1[i] = r1.normal();
  for (std::size_t i = 0; i < count; ++i) in.n2[i] = r2.normal();
  return in;
}

}  // namespace pnnp
