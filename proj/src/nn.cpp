#include "moba/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace moba {

template <typename T>
void softmax(const T* logits, int n, T* out) {
  T m = logits[0];
  for (int i = 1; i < n; ++i) m = std::max(m, logits[i]);
  T sum = T(0);
  for (int i = 0; i < n; ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (int i = 0; i < n; ++i) out[i] /= sum;
}

template <typename T>
T log_sum_exp(const T* logits, int n) {
  T m = logits[0];
  for (int i = 1; i < n; ++i) m = std::max(m, logits[i]);
  T sum = T(0);
  for (int i = 0; i < n; ++i) sum += std::exp(logits[i] - m);
  return m + std::log(sum);
}

template void softmax<float>(const float*, int, float*);
template void softmax<double>(const double*, int, double*);
template float log_sum_exp<float>(const float*, int);
template double log_sum_exp<double>(const double*, int);

namespace {

template <typename T>
void relu(const std::vector<T>& x, std::vector<T>& y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(const std::vector<T>& pre, const std::vector<T>& dy, std::vector<T>& dx) {
  for (size_t i = 0; i < pre.size(); ++i) dx[i] = pre[i] > T(0) ? dy[i] : T(0);
}

template <typename T>
void zero(std::vector<T>& v) {
  std::fill(v.begin(), v.end(), T(0));
}

}  // namespace

template <typename T>
ActivationsT<T>::ActivationsT(const NetDims& d) {
  int m = d.local_m, n = d.global_n, c = d.conv_channels;
  int ml = d.local_conv_edge(), nl = d.global_conv_edge();
  auto sz = [](std::vector<T>& v, int k) { v.assign(static_cast<size_t>(k), T(0)); };
  sz(local_c1, c * m * m);
  sz(local_c1_relu, c * m * m);
  sz(local_c2, c * ml * ml);
  sz(local_c2_relu, c * ml * ml);
  sz(local_h, d.image_embed);
  sz(global_c1, c * n * n);
  sz(global_c1_relu, c * n * n);
  sz(global_c2, c * nl * nl);
  sz(global_c2_relu, c * nl * nl);
  sz(global_h, d.image_embed);
  sz(image_cat, 2 * d.image_embed);
  sz(intent_g_logits, d.global_classes());
  sz(p_g, d.global_classes());
  sz(intent_l_logits, d.local_classes());
  sz(p_l, d.local_classes());
  for (auto& v : group_pre) sz(v, d.group_hidden);
  for (auto& v : group_relu) sz(v, d.group_hidden);
  sz(group_cat, kVectorGroups * d.group_hidden);
  sz(vec_h, d.vec_embed);
  sz(trunk_cat, d.trunk_in());
  sz(trunk_pre, d.trunk_hidden);
  sz(trunk_relu, d.trunk_hidden);
  sz(l1_logits, kNumLevel1);
  sz(p0, kNumLevel1);
  auto spaces = d.level2_spaces();
  for (int k = 0; k < kNumLevel1; ++k) {
    sz(l2_logits[static_cast<size_t>(k)], spaces[static_cast<size_t>(k)]);
    sz(p_l2[static_cast<size_t>(k)], spaces[static_cast<size_t>(k)]);
  }
  sz(d_local_c1, c * m * m);
  sz(d_local_c1_relu, c * m * m);
  sz(d_local_c2, c * ml * ml);
  sz(d_local_c2_relu, c * ml * ml);
  sz(d_local_h, d.image_embed);
  sz(d_global_c1, c * n * n);
  sz(d_global_c1_relu, c * n * n);
  sz(d_global_c2, c * nl * nl);
  sz(d_global_c2_relu, c * nl * nl);
  sz(d_global_h, d.image_embed);
  sz(d_image_cat, 2 * d.image_embed);
  sz(d_intent_g_logits, d.global_classes());
  sz(d_p_g, d.global_classes());
  sz(d_intent_l_logits, d.local_classes());
  sz(d_p_l, d.local_classes());
  for (auto& v : d_group_pre) sz(v, d.group_hidden);
  for (auto& v : d_group_relu) sz(v, d.group_hidden);
  sz(d_group_cat, kVectorGroups * d.group_hidden);
  sz(d_vec_h, d.vec_embed);
  sz(d_trunk_cat, d.trunk_in());
  sz(d_trunk_pre, d.trunk_hidden);
  sz(d_trunk_relu, d.trunk_hidden);
  sz(d_l1_logits, kNumLevel1);
  for (int k = 0; k < kNumLevel1; ++k) {
    sz(d_l2_logits[static_cast<size_t>(k)], spaces[static_cast<size_t>(k)]);
  }
}

template <typename T>
NetworkT<T>::NetworkT(const NetDims& dims) : dims_(dims) {
  int c = dims.conv_channels;
  local_conv1 = Conv2dT<T>(kLocalChannels, c, 1);
  local_conv2 = Conv2dT<T>(c, c, 2);
  local_fc = DenseT<T>(dims.local_flat(), dims.image_embed);
  global_conv1 = Conv2dT<T>(kGlobalChannels, c, 1);
  global_conv2 = Conv2dT<T>(c, c, 2);
  global_fc = DenseT<T>(dims.global_flat(), dims.image_embed);
  for (auto& gfc : group_fc) gfc = DenseT<T>(dims.group_in, dims.group_hidden);
  vec_fc = DenseT<T>(kVectorGroups * dims.group_hidden, dims.vec_embed);
  intent_global = DenseT<T>(2 * dims.image_embed, dims.global_classes());
  intent_local = DenseT<T>(2 * dims.image_embed, dims.local_classes());
  trunk = DenseT<T>(dims.trunk_in(), dims.trunk_hidden);
  head_l1 = DenseT<T>(dims.trunk_hidden, kNumLevel1);
  auto spaces = dims.level2_spaces();
  for (int k = 0; k < kNumLevel1; ++k) {
    head_l2[static_cast<size_t>(k)] = DenseT<T>(dims.trunk_hidden, spaces[static_cast<size_t>(k)]);
  }
}

template <typename T>
void NetworkT<T>::for_each_param(
    const std::function<void(const std::string&, TensorT<T>&)>& fn) {
  auto dense = [&fn](const std::string& name, DenseT<T>& d) {
    fn(name + ".w", d.w);
    fn(name + ".b", d.b);
  };
  auto conv = [&fn](const std::string& name, Conv2dT<T>& c) {
    fn(name + ".w", c.w);
    fn(name + ".b", c.b);
  };
  conv("local_conv1", local_conv1);
  conv("local_conv2", local_conv2);
  dense("local_fc", local_fc);
  conv("global_conv1", global_conv1);
  conv("global_conv2", global_conv2);
  dense("global_fc", global_fc);
  for (int k = 0; k < kVectorGroups; ++k) {
    dense("group_fc" + std::to_string(k), group_fc[static_cast<size_t>(k)]);
  }
  dense("vec_fc", vec_fc);
  dense("intent_global", intent_global);
  dense("intent_local", intent_local);
  dense("trunk", trunk);
  dense("head_l1", head_l1);
  for (int k = 0; k < kNumLevel1; ++k) {
    dense("head_l2_" + std::to_string(k), head_l2[static_cast<size_t>(k)]);
  }
}

template <typename T>
void NetworkT<T>::for_each_param(
    const std::function<void(const std::string&, const TensorT<T>&)>& fn) const {
  const_cast<NetworkT<T>*>(this)->for_each_param(
      [&fn](const std::string& name, TensorT<T>& t) { fn(name, t); });
}

template <typename T>
void NetworkT<T>::init_params(uint64_t seed) {
  Rng rng(seed);
  for_each_param([&rng](const std::string& name, TensorT<T>& t) {
    bool is_weight = name.size() >= 2 && name.substr(name.size() - 2) == ".w";
    if (!is_weight) {
      std::fill(t.v.begin(), t.v.end(), T(0));
      return;
    }
    size_t fan_in = 1;
    for (size_t i = 1; i < t.shape.size(); ++i) fan_in *= static_cast<size_t>(t.shape[i]);
    double limit = std::sqrt(3.0 / static_cast<double>(fan_in));
    for (auto& v : t.v) v = static_cast<T>((2.0 * rng.uniform_real() - 1.0) * limit);
  });
}

template <typename T>
void NetworkT<T>::zero_grad() {
  for_each_param([](const std::string&, TensorT<T>& t) { t.zero_grad(); });
}

template <typename T>
void NetworkT<T>::forward(const T* vec, const T* local, const T* global,
                          ActivationsT<T>& a) const {
  const NetDims& d = dims_;
  local_conv1.forward(local, d.local_m, a.local_c1.data());
  relu(a.local_c1, a.local_c1_relu);
  local_conv2.forward(a.local_c1_relu.data(), d.local_m, a.local_c2.data());
  relu(a.local_c2, a.local_c2_relu);
  local_fc.forward(a.local_c2_relu.data(), a.local_h.data());

  global_conv1.forward(global, d.global_n, a.global_c1.data());
  relu(a.global_c1, a.global_c1_relu);
  global_conv2.forward(a.global_c1_relu.data(), d.global_n, a.global_c2.data());
  relu(a.global_c2, a.global_c2_relu);
  global_fc.forward(a.global_c2_relu.data(), a.global_h.data());

  // e_g / e_l consume [h_l, h_g].
  std::copy(a.local_h.begin(), a.local_h.end(), a.image_cat.begin());
  std::copy(a.global_h.begin(), a.global_h.end(), a.image_cat.begin() + d.image_embed);
  intent_global.forward(a.image_cat.data(), a.intent_g_logits.data());
  softmax(a.intent_g_logits.data(), d.global_classes(), a.p_g.data());
  intent_local.forward(a.image_cat.data(), a.intent_l_logits.data());
  softmax(a.intent_l_logits.data(), d.local_classes(), a.p_l.data());

  for (int k = 0; k < kVectorGroups; ++k) {
    group_fc[static_cast<size_t>(k)].forward(vec + static_cast<size_t>(k) * d.group_in,
                                             a.group_pre[static_cast<size_t>(k)].data());
    relu(a.group_pre[static_cast<size_t>(k)], a.group_relu[static_cast<size_t>(k)]);
    std::copy(a.group_relu[static_cast<size_t>(k)].begin(),
              a.group_relu[static_cast<size_t>(k)].end(),
              a.group_cat.begin() + static_cast<size_t>(k) * d.group_hidden);
  }
  vec_fc.forward(a.group_cat.data(), a.vec_h.data());

  // h(x) consumes [h_v, h_g, h_l, p_g, p_l].
  auto it = a.trunk_cat.begin();
  it = std::copy(a.vec_h.begin(), a.vec_h.end(), it);
  it = std::copy(a.global_h.begin(), a.global_h.end(), it);
  it = std::copy(a.local_h.begin(), a.local_h.end(), it);
  it = std::copy(a.p_g.begin(), a.p_g.end(), it);
  std::copy(a.p_l.begin(), a.p_l.end(), it);
  trunk.forward(a.trunk_cat.data(), a.trunk_pre.data());
  relu(a.trunk_pre, a.trunk_relu);

  head_l1.forward(a.trunk_relu.data(), a.l1_logits.data());
  softmax(a.l1_logits.data(), kNumLevel1, a.p0.data());
  auto spaces = d.level2_spaces();
  for (int k = 0; k < kNumLevel1; ++k) {
    head_l2[static_cast<size_t>(k)].forward(a.trunk_relu.data(),
                                            a.l2_logits[static_cast<size_t>(k)].data());
    softmax(a.l2_logits[static_cast<size_t>(k)].data(), spaces[static_cast<size_t>(k)],
            a.p_l2[static_cast<size_t>(k)].data());
  }
  for (int i = 0; i < kNumLevel1; ++i) {
    if (!std::isfinite(static_cast<double>(a.l1_logits[static_cast<size_t>(i)]))) {
      throw NnError("non-finite network output");
    }
  }
}

template <typename T>
T NetworkT<T>::loss(const ActivationsT<T>& a, const SampleLabels& y,
                    const LossWeights& w) const {
  const NetDims& d = dims_;
  auto spaces = d.level2_spaces();
  auto ce = [](const std::vector<T>& logits, int label) {
    return log_sum_exp(logits.data(), static_cast<int>(logits.size())) -
           logits[static_cast<size_t>(label)];
  };
  T total = T(0);
  if (y.level1 >= 0) {
    if (y.level1 >= kNumLevel1) throw NnError("level-1 label out of range");
    total += static_cast<T>(w.a0) * ce(a.l1_logits, y.level1);
    if (y.level2 >= 0) {
      if (y.level2 >= spaces[static_cast<size_t>(y.level1)]) {
        throw NnError("level-2 label out of range");
      }
      total += static_cast<T>(w.a1) * ce(a.l2_logits[static_cast<size_t>(y.level1)], y.level2);
    }
  }
  if (y.global_intent >= 0) {
    if (y.global_intent >= d.global_classes()) throw NnError("global intent label out of range");
    total += static_cast<T>(w.bg) * ce(a.intent_g_logits, y.global_intent);
  }
  if (y.local_intent >= 0) {
    if (y.local_intent >= d.local_classes()) throw NnError("local intent label out of range");
    total += static_cast<T>(w.bl) * ce(a.intent_l_logits, y.local_intent);
  }
  if (!std::isfinite(static_cast<double>(total))) throw NnError("non-finite loss");
  return total;
}

template <typename T>
void NetworkT<T>::backward(ActivationsT<T>& a, const T* vec, const T* local, const T* global,
                           const SampleLabels& y, const LossWeights& w,
                           bool stop_intent_gradient) {
  const NetDims& d = dims_;
  zero(a.d_trunk_relu);
  zero(a.d_trunk_cat);
  zero(a.d_image_cat);
  zero(a.d_local_h);
  zero(a.d_global_h);
  zero(a.d_local_c2_relu);
  zero(a.d_global_c2_relu);
  zero(a.d_local_c1_relu);
  zero(a.d_global_c1_relu);
  zero(a.d_group_cat);
  zero(a.d_vec_h);
  zero(a.d_intent_g_logits);
  zero(a.d_intent_l_logits);
  zero(a.d_l1_logits);

  // Action terms: softmax+CE gradient at the logits of p^0 and, only for the
  // ground-truth level-1 class, of that level-2 head.
  if (y.level1 >= 0) {
    for (int i = 0; i < kNumLevel1; ++i) {
      a.d_l1_logits[static_cast<size_t>(i)] =
          static_cast<T>(w.a0) *
          (a.p0[static_cast<size_t>(i)] - (i == y.level1 ? T(1) : T(0)));
    }
    head_l1.backward(a.trunk_relu.data(), a.d_l1_logits.data(), a.d_trunk_relu.data());
    if (y.level2 >= 0) {
      auto& dlog = a.d_l2_logits[static_cast<size_t>(y.level1)];
      const auto& p = a.p_l2[static_cast<size_t>(y.level1)];
      for (size_t i = 0; i < dlog.size(); ++i) {
        dlog[i] = static_cast<T>(w.a1) *
                  (p[i] - (static_cast<int>(i) == y.level2 ? T(1) : T(0)));
      }
      head_l2[static_cast<size_t>(y.level1)].backward(a.trunk_relu.data(), dlog.data(),
                                                      a.d_trunk_relu.data());
    }
  }

  relu_backward(a.trunk_pre, a.d_trunk_relu, a.d_trunk_pre);
  trunk.backward(a.trunk_cat.data(), a.d_trunk_pre.data(), a.d_trunk_cat.data());

  const T* dc = a.d_trunk_cat.data();
  for (int i = 0; i < d.vec_embed; ++i) a.d_vec_h[static_cast<size_t>(i)] += dc[i];
  dc += d.vec_embed;
  for (int i = 0; i < d.image_embed; ++i) a.d_global_h[static_cast<size_t>(i)] += dc[i];
  dc += d.image_embed;
  for (int i = 0; i < d.image_embed; ++i) a.d_local_h[static_cast<size_t>(i)] += dc[i];
  dc += d.image_embed;

  // Intent logits receive the CE term plus, unless detached, the softmax
  // jacobian of the gradient arriving through the trunk concatenation.
  if (y.global_intent >= 0) {
    for (int i = 0; i < d.global_classes(); ++i) {
      a.d_intent_g_logits[static_cast<size_t>(i)] +=
          static_cast<T>(w.bg) *
          (a.p_g[static_cast<size_t>(i)] - (i == y.global_intent ? T(1) : T(0)));
    }
  }
  if (!stop_intent_gradient) {
    const T* dp = dc;
    T dot = T(0);
    for (int i = 0; i < d.global_classes(); ++i) dot += dp[i] * a.p_g[static_cast<size_t>(i)];
    for (int i = 0; i < d.global_classes(); ++i) {
      a.d_intent_g_logits[static_cast<size_t>(i)] += a.p_g[static_cast<size_t>(i)] * (dp[i] - dot);
    }
  }
  dc += d.global_classes();
  if (y.local_intent >= 0) {
    for (int i = 0; i < d.local_classes(); ++i) {
      a.d_intent_l_logits[static_cast<size_t>(i)] +=
          static_cast<T>(w.bl) *
          (a.p_l[static_cast<size_t>(i)] - (i == y.local_intent ? T(1) : T(0)));
    }
  }
  if (!stop_intent_gradient) {
    const T* dp = dc;
    T dot = T(0);
    for (int i = 0; i < d.local_classes(); ++i) dot += dp[i] * a.p_l[static_cast<size_t>(i)];
    for (int i = 0; i < d.local_classes(); ++i) {
      a.d_intent_l_logits[static_cast<size_t>(i)] += a.p_l[static_cast<size_t>(i)] * (dp[i] - dot);
    }
  }

  intent_global.backward(a.image_cat.data(), a.d_intent_g_logits.data(), a.d_image_cat.data());
  intent_local.backward(a.image_cat.data(), a.d_intent_l_logits.data(), a.d_image_cat.data());
  for (int i = 0; i < d.image_embed; ++i) {
    a.d_local_h[static_cast<size_t>(i)] += a.d_image_cat[static_cast<size_t>(i)];
    a.d_global_h[static_cast<size_t>(i)] +=
        a.d_image_cat[static_cast<size_t>(d.image_embed + i)];
  }

  local_fc.backward(a.local_c2_relu.data(), a.d_local_h.data(), a.d_local_c2_relu.data());
  relu_backward(a.local_c2, a.d_local_c2_relu, a.d_local_c2);
  local_conv2.backward(a.local_c1_relu.data(), d.local_m, a.d_local_c2.data(),
                       a.d_local_c1_relu.data());
  relu_backward(a.local_c1, a.d_local_c1_relu, a.d_local_c1);
  local_conv1.backward(local, d.local_m, a.d_local_c1.data(), nullptr);

  global_fc.backward(a.global_c2_relu.data(), a.d_global_h.data(), a.d_global_c2_relu.data());
  relu_backward(a.global_c2, a.d_global_c2_relu, a.d_global_c2);
  global_conv2.backward(a.global_c1_relu.data(), d.global_n, a.d_global_c2.data(),
                        a.d_global_c1_relu.data());
  relu_backward(a.global_c1, a.d_global_c1_relu, a.d_global_c1);
  global_conv1.backward(global, d.global_n, a.d_global_c1.data(), nullptr);

  vec_fc.backward(a.group_cat.data(), a.d_vec_h.data(), a.d_group_cat.data());
  for (int k = 0; k < kVectorGroups; ++k) {
    auto& dgr = a.d_group_relu[static_cast<size_t>(k)];
    std::copy(a.d_group_cat.begin() + static_cast<size_t>(k) * d.group_hidden,
              a.d_group_cat.begin() + static_cast<size_t>(k + 1) * d.group_hidden, dgr.begin());
    relu_backward(a.group_pre[static_cast<size_t>(k)], dgr,
                  a.d_group_pre[static_cast<size_t>(k)]);
    group_fc[static_cast<size_t>(k)].backward(vec + static_cast<size_t>(k) * d.group_in,
                                              a.d_group_pre[static_cast<size_t>(k)].data(),
                                              nullptr);
  }
}

template <typename T>
Prediction NetworkT<T>::predict(const ActivationsT<T>& a) const {
  Prediction p;
  auto to_float = [](const std::vector<T>& v) {
    std::vector<float> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i]);
    return out;
  };
  p.level1 = to_float(a.p0);
  for (int k = 0; k < kNumLevel1; ++k) {
    p.level2[static_cast<size_t>(k)] = to_float(a.p_l2[static_cast<size_t>(k)]);
  }
  p.global_intent = to_float(a.p_g);
  p.local_intent = to_float(a.p_l);
  return p;
}

template <typename T>
uint64_t NetworkT<T>::architecture_digest() const {
  std::string repr;
  for_each_param([&repr](const std::string& name, const TensorT<T>& t) {
    repr += name + ":";
    for (int s : t.shape) repr += std::to_string(s) + "x";
    repr += ";";
  });
  return fnv1a(repr.data(), repr.size());
}

template <typename T>
size_t NetworkT<T>::parameter_count() const {
  size_t n = 0;
  for_each_param([&n](const std::string&, const TensorT<T>& t) { n += t.size(); });
  return n;
}

void widen_params(const NetworkT<float>& src, NetworkT<double>& dst) {
  std::vector<const TensorT<float>*> from;
  src.for_each_param(
      [&from](const std::string&, const TensorT<float>& t) { from.push_back(&t); });
  size_t i = 0;
  dst.for_each_param([&from, &i](const std::string&, TensorT<double>& t) {
    const auto& s = *from[i++];
    for (size_t j = 0; j < t.v.size(); ++j) t.v[j] = static_cast<double>(s.v[j]);
  });
}

template struct ActivationsT<float>;
template struct ActivationsT<double>;
template class NetworkT<float>;
template class NetworkT<double>;

}  // namespace moba
