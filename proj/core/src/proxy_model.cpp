#include "pnnp/proxy_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "pnnp/container.hpp"

namespace pnnp {

namespace {

using json = nlohmann::ordered_json;

constexpr int C = kProxyChannels;
constexpr std::size_t kTile = 8192;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double swish_prime(double a, double sig) { return sig * (1.0 + a * (1.0 - sig)); }

PixelLinear make_linear(int in, int out) {
  PixelLinear l;
  l.in = in;
  l.out = out;
  l.w.assign(static_cast<std::size_t>(in) * out, 0.0);
  l.b.assign(out, 0.0);
  return l;
}

ProxyBranch make_branch() {
  ProxyBranch br;
  br.lift = make_linear(1, C);
  br.block1.first = make_linear(C, C);
  br.block1.second = make_linear(C, C);
  br.block2.first = make_linear(C, C);
  br.block2.second = make_linear(C, C);
  br.proj = make_linear(C, 1);
  return br;
}

// per-sample intermediates for one tile, each count*C
struct BranchCache {
  std::vector<double> h0, a1, sig1, h1, a2, sig2, h2;
  void resize(std::size_t count) {
    const std::size_t n = count * C;
    h0.resize(n);
    a1.resize(n);
    sig1.resize(n);
    h1.resize(n);
    a2.resize(n);
    sig2.resize(n);
    h2.resize(n);
  }
};

void branch_forward(const ProxyBranch& br, const double* x, std::size_t count,
                    double* y, BranchCache* cache) {
  if (cache) cache->resize(count);
  for (std::size_t j = 0; j < count; ++j) {
    double h[C], a[C], sig[C], t[C];
    const double xv = x[j];
    for (int c = 0; c < C; ++c) h[c] = br.lift.w[c] * xv + br.lift.b[c];
    if (cache) std::memcpy(&cache->h0[j * C], h, sizeof h);

    // block 1
    for (int r = 0; r < C; ++r) {
      double acc = br.block1.first.b[r];
      const double* wr = &br.block1.first.w[static_cast<std::size_t>(r) * C];
      for (int c = 0; c < C; ++c) acc += wr[c] * h[c];
      a[r] = acc;
      sig[r] = sigmoid(acc);
      t[r] = acc * sig[r];
    }
    if (cache) {
      std::memcpy(&cache->a1[j * C], a, sizeof a);
      std::memcpy(&cache->sig1[j * C], sig, sizeof sig);
    }
    for (int r = 0; r < C; ++r) {
      double acc = br.block1.second.b[r];
      const double* wr = &br.block1.second.w[static_cast<std::size_t>(r) * C];
      for (int c = 0; c < C; ++c) acc += wr[c] * t[c];
      h[r] += acc;
    }
    if (cache) std::memcpy(&cache->h1[j * C], h, sizeof h);

    // block 2
    for (int r = 0; r < C; ++r) {
      double acc = br.block2.first.b[r];
      const double* wr = &br.block2.first.w[static_cast<std::size_t>(r) * C];
      for (int c = 0; c < C; ++c) acc += wr[c] * h[c];
      a[r] = acc;
      sig[r] = sigmoid(acc);
      t[r] = acc * sig[r];
    }
    if (cache) {
      std::memcpy(&cache->a2[j * C], a, sizeof a);
      std::memcpy(&cache->sig2[j * C], sig, sizeof sig);
    }
    for (int r = 0; r < C; ++r) {
      double acc = br.block2.second.b[r];
      const double* wr = &br.block2.second.w[static_cast<std::size_t>(r) * C];
      for (int c = 0; c < C; ++c) acc += wr[c] * t[c];
      h[r] += acc;
    }
    if (cache) std::memcpy(&cache->h2[j * C], h, sizeof h);

    double out = br.proj.b[0];
    for (int c = 0; c < C; ++c) out += br.proj.w[c] * h[c];
    y[j] = out;
  }
}

void branch_backward(const ProxyBranch& br, const double* x, std::size_t count,
                     const BranchCache& cache, const double* dy,
                     ProxyBranch& grads) {
  for (std::size_t j = 0; j < count; ++j) {
    const double g = dy[j];
    if (g == 0.0) continue;
    const double* h0 = &cache.h0[j * C];
    const double* a1 = &cache.a1[j * C];
    const double* s1 = &cache.sig1[j * C];
    const double* h1 = &cache.h1[j * C];
    const double* a2 = &cache.a2[j * C];
    const double* s2 = &cache.sig2[j * C];
    const double* h2 = &cache.h2[j * C];

    double dh[C];
    for (int c = 0; c < C; ++c) {
      grads.proj.w[c] += g * h2[c];
      dh[c] = br.proj.w[c] * g;
    }
    grads.proj.b[0] += g;

    auto block_backward = [&](const ResidualBlock& blk, ResidualBlock& bg,
                              const double* a, const double* sig, const double* hin) {
      double t[C], ds[C], da[C];
      for (int c = 0; c < C; ++c) t[c] = a[c] * sig[c];
      for (int c = 0; c < C; ++c) ds[c] = 0.0;
      for (int r = 0; r < C; ++r) {
        const double dr = dh[r];
        bg.second.b[r] += dr;
        double* gw = &bg.second.w[static_cast<std::size_t>(r) * C];
        const double* wr = &blk.second.w[static_cast<std::size_t>(r) * C];
        for (int c = 0; c < C; ++c) {
          gw[c] += dr * t[c];
          ds[c] += wr[c] * dr;
        }
      }
      for (int c = 0; c < C; ++c) da[c] = ds[c] * swish_prime(a[c], sig[c]);
      for (int r = 0; r < C; ++r) {
        const double dr = da[r];
        bg.first.b[r] += dr;
        double* gw = &bg.first.w[static_cast<std::size_t>(r) * C];
        const double* wr = &blk.first.w[static_cast<std::size_t>(r) * C];
        for (int c = 0; c < C; ++c) gw[c] += dr * hin[c];
        (void)wr;
      }
      // dh <- dh (identity path) + first^T da
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (int r = 0; r < C; ++r)
          acc += blk.first.w[static_cast<std::size_t>(r) * C + c] * da[r];
        dh[c] += acc;
      }
    };

    block_backward(br.block2, grads.block2, a2, s2, h1);
    block_backward(br.block1, grads.block1, a1, s1, h0);

    const double xv = x[j];
    for (int c = 0; c < C; ++c) {
      grads.lift.w[c] += dh[c] * xv;
      grads.lift.b[c] += dh[c];
    }
  }
}

void append_linear(std::vector<double>& flat, const PixelLinear& l) {
  flat.insert(flat.end(), l.w.begin(), l.w.end());
  flat.insert(flat.end(), l.b.begin(), l.b.end());
}

void append_branch(std::vector<double>& flat, const ProxyBranch& br) {
  append_linear(flat, br.lift);
  append_linear(flat, br.block1.first);
  append_linear(flat, br.block1.second);
  append_linear(flat, br.block2.first);
  append_linear(flat, br.block2.second);
  append_linear(flat, br.proj);
}

void take_linear(PixelLinear& l, std::span<const double>& rest) {
  std::copy_n(rest.begin(), l.w.size(), l.w.begin());
  rest = rest.subspan(l.w.size());
  std::copy_n(rest.begin(), l.b.size(), l.b.begin());
  rest = rest.subspan(l.b.size());
}

void take_branch(ProxyBranch& br, std::span<const double>& rest) {
  take_linear(br.lift, rest);
  take_linear(br.block1.first, rest);
  take_linear(br.block1.second, rest);
  take_linear(br.block2.first, rest);
  take_linear(br.block2.second, rest);
  take_linear(br.proj, rest);
}

void init_branch(ProxyBranch& br, RandomStream& rng, double out_scale) {
  br = make_branch();
  for (int c = 0; c < C; ++c) br.lift.w[c] = rng.normal();
  for (int c = 0; c < C; ++c) br.lift.b[c] = rng.u01() * 4.0 - 2.0;
  for (auto* blk : {&br.block1, &br.block2}) {
    for (double& w : blk->first.w) w = 0.5 * rng.normal();
    for (double& b : blk->first.b) b = rng.u01() * 4.0 - 2.0;
    // second linear stays zero: the block is the identity at init
  }
  double slope = 0.0;
  do {
    slope = 0.0;
    for (int c = 0; c < C; ++c) {
      br.proj.w[c] = 0.2 * rng.normal();
      slope += br.proj.w[c] * br.lift.w[c];
    }
  } while (std::abs(slope) < 0.02);
  const double scale = out_scale / slope;
  double offset = 0.0;
  for (int c = 0; c < C; ++c) {
    br.proj.w[c] *= scale;
    offset += br.proj.w[c] * br.lift.b[c];
  }
  br.proj.b[0] = -offset;
}

}  // namespace

std::size_t ProxyBranch::parameter_count() const {
  return lift.parameter_count() + block1.first.parameter_count() +
         block1.second.parameter_count() + block2.first.parameter_count() +
         block2.second.parameter_count() + proj.parameter_count();
}

std::size_t ProxyModel::parameter_count() const {
  return dep.parameter_count() + indep.parameter_count() + gain_lut.size();
}

int ProxyModel::lut_index(int iso) const {
  const auto it = std::lower_bound(isos.begin(), isos.end(), iso);
  if (it == isos.end() || *it != iso) return -1;
  return static_cast<int>(it - isos.begin());
}

double ProxyModel::gain_at(int iso, bool interpolate) const {
  const int idx = lut_index(iso);
  if (idx >= 0) return gain_lut[idx];
  if (!interpolate)
    throw std::invalid_argument("proxy model: iso " + std::to_string(iso) +
                                " not in gain LUT");
  const auto hi = std::lower_bound(isos.begin(), isos.end(), iso);
  if (hi == isos.begin()) return gain_lut.front();
  if (hi == isos.end()) return gain_lut.back();
  const std::size_t i = static_cast<std::size_t>(hi - isos.begin());
  const double t = (std::log(static_cast<double>(iso)) - std::log(static_cast<double>(isos[i - 1]))) /
                   (std::log(static_cast<double>(isos[i])) - std::log(static_cast<double>(isos[i - 1])));
  return std::exp(std::log(gain_lut[i - 1]) +
                  t * (std::log(gain_lut[i]) - std::log(gain_lut[i - 1])));
}

ProxyModel init_model(const std::vector<int>& isos,
                      const std::map<int, double>& calibrated_gain,
                      std::uint64_t seed) {
  if (isos.empty()) throw std::invalid_argument("init_model: empty ISO list");
  ProxyModel m;
  m.init_seed = seed;
  m.isos = isos;
  std::sort(m.isos.begin(), m.isos.end());
  for (int iso : m.isos) {
    const auto it = calibrated_gain.find(iso);
    if (it == calibrated_gain.end())
      throw std::invalid_argument("init_model: no calibrated gain for iso " +
                                  std::to_string(iso));
    if (it->second <= 0.0)
      throw std::invalid_argument("init_model: gain must be positive");
    m.gain_lut.push_back(it->second);
  }
  RandomStream dep_rng(derive_seed(seed, "proxy/init/dep"));
  RandomStream indep_rng(derive_seed(seed, "proxy/init/indep"));
  init_branch(m.dep, dep_rng, 1.0);
  init_branch(m.indep, indep_rng, 0.1);
  return m;
}

namespace {

std::vector<double> forward_with_gain(const ProxyModel& model,
                                      std::span<const double> n1,
                                      std::span<const double> n2, double gain) {
  if (n1.size() != n2.size())
    throw std::invalid_argument("forward: n1/n2 size mismatch");
  std::vector<double> out(n1.size());
  std::vector<double> tmp(std::min(n1.size(), kTile));
  for (std::size_t off = 0; off < n1.size(); off += kTile) {
    const std::size_t count = std::min(kTile, n1.size() - off);
    branch_forward(model.dep, n1.data() + off, count, out.data() + off, nullptr);
    branch_forward(model.indep, n2.data() + off, count, tmp.data(), nullptr);
    for (std::size_t j = 0; j < count; ++j)
      out[off + j] = gain * out[off + j] + tmp[j];
  }
  return out;
}

}  // namespace

std::vector<double> forward(const ProxyModel& model, std::span<const double> n1,
                            std::span<const double> n2, int iso) {
  return forward_with_gain(model, n1, n2, model.gain_at(iso, false));
}

std::vector<double> sample(const ProxyModel& model, std::size_t count, int iso,
                           std::uint64_t seed, bool interpolate_gain) {
  const double g = model.gain_at(iso, interpolate_gain);
  RandomStream rng1(derive_seed(seed, "proxy/sample/n1"));
  RandomStream rng2(derive_seed(seed, "proxy/sample/n2"));
  std::vector<double> n1(count), n2(count);
  for (std::size_t i = 0; i < count; ++i) n1[i] = rng1.normal();
  for (std::size_t i = 0; i < count; ++i) n2[i] = rng2.normal();
  return forward_with_gain(model, n1, n2, g);
}

std::vector<double> pack_parameters(const ProxyModel& model) {
  std::vector<double> flat;
  flat.reserve(model.parameter_count());
  append_branch(flat, model.dep);
  append_branch(flat, model.indep);
  flat.insert(flat.end(), model.gain_lut.begin(), model.gain_lut.end());
  return flat;
}

void unpack_parameters(ProxyModel& model, std::span<const double> flat) {
  if (flat.size() != model.parameter_count())
    throw std::invalid_argument("unpack_parameters: length mismatch");
  std::span<const double> rest = flat;
  take_branch(model.dep, rest);
  take_branch(model.indep, rest);
  std::copy_n(rest.begin(), model.gain_lut.size(), model.gain_lut.begin());
}

std::vector<double> backward(const ProxyModel& model, std::span<const double> n1,
                             std::span<const double> n2, int iso,
                             std::span<const double> grad_out) {
  if (n1.size() != n2.size() || n1.size() != grad_out.size())
    throw std::invalid_argument("backward: size mismatch");
  const int lut = model.lut_index(iso);
  if (lut < 0)
    throw std::invalid_argument("backward: iso not in gain LUT");
  const double g = model.gain_lut[static_cast<std::size_t>(lut)];

  ProxyModel grads;  // same shapes, zero-valued
  grads.dep = make_branch();
  grads.indep = make_branch();
  grads.isos = model.isos;
  grads.gain_lut.assign(model.gain_lut.size(), 0.0);

  BranchCache cache;
  std::vector<double> fdep(kTile), dy_dep(kTile);
  double dgain = 0.0;
  for (std::size_t off = 0; off < n1.size(); off += kTile) {
    const std::size_t count = std::min(kTile, n1.size() - off);
    branch_forward(model.dep, n1.data() + off, count, fdep.data(), &cache);
    for (std::size_t j = 0; j < count; ++j) {
      dgain += grad_out[off + j] * fdep[j];
      dy_dep[j] = grad_out[off + j] * g;
    }
    branch_backward(model.dep, n1.data() + off, count, cache, dy_dep.data(), grads.dep);

    branch_forward(model.indep, n2.data() + off, count, fdep.data(), &cache);
    branch_backward(model.indep, n2.data() + off, count, cache,
                    grad_out.data() + off, grads.indep);
  }
  grads.gain_lut[static_cast<std::size_t>(lut)] = dgain;
  return pack_parameters(grads);
}

namespace {

void write_linear(const PixelLinear& l, const std::string& dir, const std::string& name,
                  json& manifest) {
  Array2D w{static_cast<std::size_t>(l.out), static_cast<std::size_t>(l.in), {}};
  w.data.assign(l.w.begin(), l.w.end());
  Array2D b{static_cast<std::size_t>(l.out), 1, {}};
  b.data.assign(l.b.begin(), l.b.end());
  write_array(w, dir + "/" + name + "_w.pnnf");
  write_array(b, dir + "/" + name + "_b.pnnf");
  manifest["tensors"].push_back({{"name", name},
                                 {"out", l.out},
                                 {"in", l.in},
                                 {"w", name + "_w.pnnf"},
                                 {"b", name + "_b.pnnf"}});
}

void read_linear(PixelLinear& l, const std::string& dir, const std::string& name) {
  const Array2D w = read_array(dir + "/" + name + "_w.pnnf");
  const Array2D b = read_array(dir + "/" + name + "_b.pnnf");
  if (w.height != static_cast<std::size_t>(l.out) ||
      w.width != static_cast<std::size_t>(l.in) ||
      b.height != static_cast<std::size_t>(l.out) || b.width != 1)
    throw std::runtime_error("load_model: tensor shape mismatch for " + name);
  l.w.assign(w.data.begin(), w.data.end());
  l.b.assign(b.data.begin(), b.data.end());
}

const char* kTensorNames[] = {"lift", "block1_first", "block1_second",
                              "block2_first", "block2_second", "proj"};

PixelLinear* branch_tensor(ProxyBranch& br, int i) {
  switch (i) {
    case 0: return &br.lift;
    case 1: return &br.block1.first;
    case 2: return &br.block1.second;
    case 3: return &br.block2.first;
    case 4: return &br.block2.second;
    default: return &br.proj;
  }
}

}  // namespace

void save_model(const ProxyModel& model, const std::string& dir) {
  std::filesystem::create_directories(dir);
  json j;
  j["channels"] = kProxyChannels;
  j["isos"] = model.isos;
  j["gain_lut"] = model.gain_lut;
  j["init_seed"] = model.init_seed;
  j["tensors"] = json::array();
  ProxyModel& m = const_cast<ProxyModel&>(model);
  for (const char* prefix : {"dep", "indep"}) {
    ProxyBranch& br = std::string(prefix) == "dep" ? m.dep : m.indep;
    for (int i = 0; i < 6; ++i)
      write_linear(*branch_tensor(br, i), dir,
                   std::string(prefix) + "_" + kTensorNames[i], j);
  }
  std::ofstream out(dir + "/model.json", std::ios::trunc);
  if (!out) throw std::runtime_error("save_model: cannot write to " + dir);
  out << j.dump(2) << "\n";
}

ProxyModel load_model(const std::string& dir) {
  std::ifstream in(dir + "/model.json");
  if (!in) throw std::runtime_error("load_model: missing model.json in " + dir);
  json j = json::parse(in);
  if (j.value("channels", kProxyChannels) != kProxyChannels)
    throw std::runtime_error("load_model: channel count mismatch");
  ProxyModel m;
  m.dep = make_branch();
  m.indep = make_branch();
  m.isos = j.at("isos").get<std::vector<int>>();
  m.gain_lut = j.at("gain_lut").get<std::vector<double>>();
  m.init_seed = j.value("init_seed", std::uint64_t{0});
  if (m.isos.size() != m.gain_lut.size())
    throw std::runtime_error("load_model: LUT length mismatch");
  for (const char* prefix : {"dep", "indep"}) {
    ProxyBranch& br = std::string(prefix) == "dep" ? m.dep : m.indep;
    for (int i = 0; i < 6; ++i)
      read_linear(*branch_tensor(br, i), dir,
                  std::string(prefix) + "_" + kTensorNames[i]);
  }
  return m;
}

}  // namespace pnnp
