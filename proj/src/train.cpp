#include "moba/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <thread>

namespace moba {

namespace {

int worker_count(const TrainParams& tp) {
  if (tp.threads > 0) return tp.threads;
  unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 8u));
}

LossWeights loss_weights(const TrainParams& tp) { return {tp.w_a0, tp.w_a1, tp.w_bg, tp.w_bl}; }

// Pointers to one sample's (possibly masked) inputs.
struct SampleView {
  const float* vec;
  const float* local;
  const float* global;
};

struct ZeroBuffers {
  std::vector<float> vec, local, global;
  explicit ZeroBuffers(const FeatureDims& d)
      : vec(static_cast<size_t>(d.vec_size()), 0.0f),
        local(static_cast<size_t>(d.local_size()), 0.0f),
        global(static_cast<size_t>(d.global_size()), 0.0f) {}
};

SampleView view_of(const Sample& s, const FeatureMask& mask, const ZeroBuffers& zeros) {
  return {mask.zero_vector ? zeros.vec.data() : s.features.vec.data(),
          mask.zero_local ? zeros.local.data() : s.features.local.data(),
          mask.zero_global ? zeros.global.data() : s.features.global.data()};
}

}  // namespace

AdamState make_adam_state(const Network& net) {
  AdamState st;
  net.for_each_param([&st](const std::string&, const TensorT<float>& t) {
    st.m.emplace_back(t.size(), 0.0f);
    st.v.emplace_back(t.size(), 0.0f);
  });
  return st;
}

void adam_step(Network& net, AdamState& state, const TrainParams& tp) {
  state.step += 1;
  double b1t = 1.0 - std::pow(static_cast<double>(tp.beta1), static_cast<double>(state.step));
  double b2t = 1.0 - std::pow(static_cast<double>(tp.beta2), static_cast<double>(state.step));
  size_t idx = 0;
  net.for_each_param([&](const std::string& name, TensorT<float>& t) {
    auto& m = state.m[idx];
    auto& v = state.v[idx];
    ++idx;
    for (size_t i = 0; i < t.size(); ++i) {
      float g = t.g[i];
      if (!std::isfinite(g)) throw NnError("non-finite gradient in " + name);
      g += 2.0f * tp.lambda * t.v[i];
      m[i] = tp.beta1 * m[i] + (1.0f - tp.beta1) * g;
      v[i] = tp.beta2 * v[i] + (1.0f - tp.beta2) * g * g;
      double mhat = static_cast<double>(m[i]) / b1t;
      double vhat = static_cast<double>(v[i]) / b2t;
      t.v[i] -= static_cast<float>(static_cast<double>(tp.lr) * mhat /
                                   (std::sqrt(vhat) + static_cast<double>(tp.eps)));
    }
  });
}

EvalStats evaluate(const Network& net, const std::vector<Sample>& samples, const TrainParams& tp,
                   const FeatureMask& mask) {
  EvalStats out;
  if (samples.empty()) return out;
  int workers = worker_count(tp);
  ZeroBuffers zeros(feature_dims(GridSpec{net.dims().global_n, 0.0f, net.dims().local_m}));
  LossWeights w = loss_weights(tp);

  struct Partial {
    double loss = 0.0;
    long n1 = 0, c1 = 0, n2 = 0, c2 = 0, ng = 0, cg = 0, nl = 0, cl = 0;
  };
  std::vector<Partial> parts(static_cast<size_t>(workers));
  auto run = [&](int wid) {
    ActivationsT<float> act(net.dims());
    Partial& p = parts[static_cast<size_t>(wid)];
    for (size_t i = static_cast<size_t>(wid); i < samples.size();
         i += static_cast<size_t>(workers)) {
      const Sample& s = samples[i];
      SampleView in = view_of(s, mask, zeros);
      net.forward(in.vec, in.local, in.global, act);
      p.loss += static_cast<double>(net.loss(act, s.labels, w));
      auto argmax = [](const std::vector<float>& v) {
        return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
      };
      if (s.labels.level1 >= 0) {
        p.n1 += 1;
        if (argmax(act.p0) == s.labels.level1) p.c1 += 1;
        if (s.labels.level2 >= 0 &&
            act.p_l2[static_cast<size_t>(s.labels.level1)].size() > 1) {
          p.n2 += 1;
          if (argmax(act.p_l2[static_cast<size_t>(s.labels.level1)]) == s.labels.level2) {
            p.c2 += 1;
          }
        }
      }
      if (s.labels.global_intent >= 0) {
        p.ng += 1;
        if (argmax(act.p_g) == s.labels.global_intent) p.cg += 1;
      }
      if (s.labels.local_intent >= 0) {
        p.nl += 1;
        if (argmax(act.p_l) == s.labels.local_intent) p.cl += 1;
      }
    }
  };
  std::vector<std::thread> threads;
  for (int wid = 1; wid < workers; ++wid) threads.emplace_back(run, wid);
  run(0);
  for (auto& t : threads) t.join();

  Partial total;
  for (const auto& p : parts) {
    total.loss += p.loss;
    total.n1 += p.n1;
    total.c1 += p.c1;
    total.n2 += p.n2;
    total.c2 += p.c2;
    total.ng += p.ng;
    total.cg += p.cg;
    total.nl += p.nl;
    total.cl += p.cl;
  }
  out.loss = total.loss / static_cast<double>(samples.size());
  out.acc_level1 = total.n1 ? static_cast<double>(total.c1) / static_cast<double>(total.n1) : 0.0;
  out.acc_level2 = total.n2 ? static_cast<double>(total.c2) / static_cast<double>(total.n2) : 0.0;
  out.acc_global = total.ng ? static_cast<double>(total.cg) / static_cast<double>(total.ng) : 0.0;
  out.acc_local = total.nl ? static_cast<double>(total.cl) / static_cast<double>(total.nl) : 0.0;
  return out;
}

namespace {

std::string log_row(int epoch, const char* split, const EvalStats& st) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d, %s, %.6f, %.4f, %.4f, %.4f, %.4f", epoch, split, st.loss,
                st.acc_level1, st.acc_level2, st.acc_global, st.acc_local);
  return buf;
}

}  // namespace

void train_model(Network& net, const Dataset& data, const TrainOptions& opts,
                 std::vector<std::string>* log) {
  const TrainParams& tp = opts.params;
  if (data.train.empty()) throw DataError("train_model: empty training split");
  if (data.dims.local_m != net.dims().local_m || data.dims.global_n != net.dims().global_n) {
    throw NnError("train_model: dataset dims do not match the architecture");
  }
  int workers = worker_count(tp);
  ZeroBuffers zeros(data.dims);
  LossWeights w = loss_weights(tp);
  AdamState adam = make_adam_state(net);

  // Per-worker replicas: gradients accumulate locally, then reduce in worker
  // order so results do not depend on scheduling.
  std::vector<std::unique_ptr<Network>> replicas;
  for (int i = 0; i < workers; ++i) replicas.push_back(std::make_unique<Network>(net.dims()));

  std::vector<size_t> order(data.train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffle_rng(opts.seed);

  bool stop_intent = tp.stop_intent_gradient != 0;
  int batch = std::max(1, tp.batch_size);

  if (log) {
    EvalStats tr = evaluate(net, data.train, tp, opts.mask);
    EvalStats te = evaluate(net, data.test, tp, opts.mask);
    log->push_back(log_row(0, "train", tr));
    if (!data.test.empty()) log->push_back(log_row(0, "test", te));
  }

  for (int epoch = 1; epoch <= tp.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(batch)) {
      size_t end = std::min(order.size(), start + static_cast<size_t>(batch));
      size_t count = end - start;

      // Sync replicas with the current parameters, clear their grads.
      for (auto& rep : replicas) {
        size_t idx = 0;
        std::vector<TensorT<float>*> dst;
        rep->for_each_param([&dst](const std::string&, TensorT<float>& t) { dst.push_back(&t); });
        net.for_each_param([&dst, &idx](const std::string&, TensorT<float>& t) {
          dst[idx]->v = t.v;
          std::fill(dst[idx]->g.begin(), dst[idx]->g.end(), 0.0f);
          ++idx;
        });
      }

      auto run = [&](int wid) {
        Network& rep = *replicas[static_cast<size_t>(wid)];
        ActivationsT<float> act(rep.dims());
        for (size_t i = start + static_cast<size_t>(wid); i < end;
             i += static_cast<size_t>(workers)) {
          const Sample& s = data.train[order[i]];
          SampleView in = view_of(s, opts.mask, zeros);
          rep.forward(in.vec, in.local, in.global, act);
          LossWeights sw = w;
          sw.a0 *= s.weights[0];
          sw.a1 *= s.weights[1];
          sw.bg *= s.weights[2];
          sw.bl *= s.weights[3];
          rep.backward(act, in.vec, in.local, in.global, s.labels, sw, stop_intent);
        }
      };
      std::vector<std::thread> threads;
      for (int wid = 1; wid < workers; ++wid) threads.emplace_back(run, wid);
      run(0);
      for (auto& t : threads) t.join();

      // Mean gradient, reduced in fixed worker order.
      std::vector<TensorT<float>*> main_tensors;
      net.for_each_param(
          [&main_tensors](const std::string&, TensorT<float>& t) { main_tensors.push_back(&t); });
      for (auto* t : main_tensors) std::fill(t->g.begin(), t->g.end(), 0.0f);
      float inv = 1.0f / static_cast<float>(count);
      for (auto& rep : replicas) {
        size_t idx = 0;
        rep->for_each_param([&main_tensors, &idx](const std::string&, TensorT<float>& t) {
          auto& g = main_tensors[idx]->g;
          for (size_t i = 0; i < g.size(); ++i) g[i] += t.g[i];
          ++idx;
        });
      }
      for (auto* t : main_tensors) {
        for (auto& g : t->g) g *= inv;
      }
      adam_step(net, adam, tp);
    }

    if (log && (epoch % std::max(1, tp.log_every) == 0 || epoch == tp.epochs)) {
      EvalStats tr = evaluate(net, data.train, tp, opts.mask);
      log->push_back(log_row(epoch, "train", tr));
      if (!data.test.empty()) {
        EvalStats te = evaluate(net, data.test, tp, opts.mask);
        log->push_back(log_row(epoch, "test", te));
      }
    }
  }
}

// --- Checkpoints ---

std::vector<uint8_t> encode_checkpoint(const Network& net, uint64_t config_digest) {
  std::vector<uint8_t> out;
  auto u16 = [&out](uint16_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
  };
  auto u32 = [&out](uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  };
  auto u64 = [&out, &u32](uint64_t v) {
    u32(static_cast<uint32_t>(v));
    u32(static_cast<uint32_t>(v >> 32));
  };
  for (char c : kCheckpointMagic) out.push_back(static_cast<uint8_t>(c));
  u16(kCheckpointVersion);
  u64(config_digest);
  u64(net.architecture_digest());
  uint32_t count = 0;
  net.for_each_param([&count](const std::string&, const TensorT<float>&) { ++count; });
  u32(count);
  net.for_each_param([&](const std::string& name, const TensorT<float>& t) {
    u16(static_cast<uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    out.push_back(static_cast<uint8_t>(t.shape.size()));
    for (int dim : t.shape) u32(static_cast<uint32_t>(dim));
    for (float v : t.v) {
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      u32(bits);
    }
  });
  return out;
}

void save_checkpoint(const Network& net, const std::string& path, uint64_t config_digest) {
  std::vector<uint8_t> bytes = encode_checkpoint(net, config_digest);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw NnError("cannot open for write: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw NnError("short write: " + path);
}

uint64_t load_checkpoint(Network& net, const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw NnError("cannot open checkpoint: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  size_t pos = 0;
  auto need = [&](size_t n) {
    if (pos + n > bytes.size()) throw NnError("truncated checkpoint: " + path);
  };
  need(4);
  if (std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw NnError("bad checkpoint magic: " + path);
  }
  pos = 4;
  auto u16 = [&]() {
    need(2);
    uint16_t v = static_cast<uint16_t>(bytes[pos] | (bytes[pos + 1] << 8));
    pos += 2;
    return v;
  };
  auto u32 = [&]() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes[pos + i]) << (8 * i);
    pos += 4;
    return v;
  };
  auto u64 = [&]() {
    uint64_t lo = u32();
    uint64_t hi = u32();
    return lo | (hi << 32);
  };
  if (u16() != kCheckpointVersion) throw NnError("unsupported checkpoint version");
  uint64_t config_digest = u64();
  uint64_t arch = u64();
  if (arch != net.architecture_digest()) {
    throw NnError("checkpoint architecture does not match the configured network");
  }
  uint32_t count = u32();
  uint32_t seen = 0;
  net.for_each_param([&](const std::string& name, TensorT<float>& t) {
    if (seen++ >= count) throw NnError("checkpoint tensor count mismatch");
    uint16_t len = u16();
    need(len);
    std::string stored(bytes.begin() + static_cast<ptrdiff_t>(pos),
                       bytes.begin() + static_cast<ptrdiff_t>(pos + len));
    pos += len;
    if (stored != name) throw NnError("checkpoint tensor order mismatch: " + stored);
    need(1);
    uint8_t rank = bytes[pos++];
    if (rank != t.shape.size()) throw NnError("checkpoint tensor rank mismatch: " + name);
    for (int dim : t.shape) {
      if (u32() != static_cast<uint32_t>(dim)) {
        throw NnError("checkpoint tensor shape mismatch: " + name);
      }
    }
    for (auto& v : t.v) {
      uint32_t bits = u32();
      std::memcpy(&v, &bits, 4);
    }
  });
  if (seen != count) throw NnError("checkpoint tensor count mismatch");
  if (pos != bytes.size()) throw NnError("trailing bytes in checkpoint");
  return config_digest;
}

double gradient_check(uint64_t seed, const GridSpec& grid, int coords_per_tensor) {
  NetDims dims = net_dims(grid);
  NetworkT<double> net(dims);
  net.init_params(seed);

  Rng rng(seed ^ 0x67726164636865ull);
  FeatureDims fd = feature_dims(grid);
  std::vector<double> vec(static_cast<size_t>(fd.vec_size()));
  std::vector<double> local(static_cast<size_t>(fd.local_size()));
  std::vector<double> global(static_cast<size_t>(fd.global_size()));
  for (auto& v : vec) v = rng.uniform_real();
  for (auto& v : local) v = rng.uniform_real();
  for (auto& v : global) v = rng.uniform_real();
  SampleLabels y;
  y.level1 = static_cast<int>(rng.uniform(kNumLevel1));
  y.level2 = static_cast<int>(rng.uniform(
      static_cast<uint64_t>(dims.level2_spaces()[static_cast<size_t>(y.level1)])));
  y.global_intent = static_cast<int>(rng.uniform(static_cast<uint64_t>(dims.global_classes())));
  y.local_intent = static_cast<int>(rng.uniform(static_cast<uint64_t>(dims.local_classes())));
  LossWeights w;

  ActivationsT<double> act(dims);
  net.zero_grad();
  net.forward(vec.data(), local.data(), global.data(), act);
  net.backward(act, vec.data(), local.data(), global.data(), y, w, false);

  double max_rel = 0.0;
  const double h = 1e-6;
  net.for_each_param([&](const std::string&, TensorT<double>& t) {
    for (int c = 0; c < coords_per_tensor; ++c) {
      size_t i = static_cast<size_t>(rng.uniform(t.size()));
      double saved = t.v[i];
      t.v[i] = saved + h;
      net.forward(vec.data(), local.data(), global.data(), act);
      double up = net.loss(act, y, w);
      t.v[i] = saved - h;
      net.forward(vec.data(), local.data(), global.data(), act);
      double down = net.loss(act, y, w);
      t.v[i] = saved;
      double numeric = (up - down) / (2.0 * h);
      double analytic = t.g[i];
      double rel = std::abs(analytic - numeric) /
                   std::max(std::abs(analytic) + std::abs(numeric), 1e-3);
      max_rel = std::max(max_rel, rel);
    }
  });
  // Restore the forward state for any later use of `net`.
  net.forward(vec.data(), local.data(), global.data(), act);
  return max_rel;
}

}  // namespace moba
