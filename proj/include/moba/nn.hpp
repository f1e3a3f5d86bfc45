#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "moba/config.hpp"
#include "moba/features.hpp"
#include "moba/rng.hpp"

namespace moba {

struct NnError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense tensor with an optional gradient buffer of the same shape.
template <typename T>
struct TensorT {
  std::vector<int> shape;
  std::vector<T> v;
  std::vector<T> g;

  TensorT() = default;
  explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    v.assign(n, T(0));
    g.assign(n, T(0));
  }
  size_t size() const { return v.size(); }
  void zero_grad() { std::fill(g.begin(), g.end(), T(0)); }
};

template <typename T>
struct DenseT {
  TensorT<T> w;  // [out][in]
  TensorT<T> b;  // [out]
  int in = 0, out = 0;

  DenseT() = default;
  DenseT(int in_dim, int out_dim)
      : w({out_dim, in_dim}), b({out_dim}), in(in_dim), out(out_dim) {}

  void forward(const T* x, T* y) const {
    for (int i = 0; i < out; ++i) {
      const T* row = w.v.data() + static_cast<size_t>(i) * in;
      T acc = b.v[static_cast<size_t>(i)];
      for (int j = 0; j < in; ++j) acc += row[j] * x[j];
      y[i] = acc;
    }
  }
  // Accumulates parameter grads; dx may be null, and is accumulated into.
  void backward(const T* x, const T* dy, T* dx) {
    for (int i = 0; i < out; ++i) {
      T d = dy[i];
      if (d == T(0)) continue;
      T* wrow = w.g.data() + static_cast<size_t>(i) * in;
      const T* vrow = w.v.data() + static_cast<size_t>(i) * in;
      b.g[static_cast<size_t>(i)] += d;
      for (int j = 0; j < in; ++j) {
        wrow[j] += d * x[j];
        if (dx) dx[j] += d * vrow[j];
      }
    }
  }
};

// 3x3 convolution, padding 1.
template <typename T>
struct Conv2dT {
  TensorT<T> w;  // [cout][cin][3][3]
  TensorT<T> b;  // [cout]
  int cin = 0, cout = 0, stride = 1;

  Conv2dT() = default;
  Conv2dT(int cin_, int cout_, int stride_)
      : w({cout_, cin_, 3, 3}), b({cout_}), cin(cin_), cout(cout_), stride(stride_) {}

  static int out_edge(int in_edge, int stride) { return (in_edge + 2 - 3) / stride + 1; }

  void forward(const T* x, int edge, T* y) const {
    int oe = out_edge(edge, stride);
    for (int oc = 0; oc < cout; ++oc) {
      for (int oy = 0; oy < oe; ++oy) {
        for (int ox = 0; ox < oe; ++ox) {
          T acc = b.v[static_cast<size_t>(oc)];
          for (int ic = 0; ic < cin; ++ic) {
            const T* plane = x + static_cast<size_t>(ic) * edge * edge;
            const T* wbase =
                w.v.data() + ((static_cast<size_t>(oc) * cin + ic) * 9);
            for (int ky = 0; ky < 3; ++ky) {
              int iy = oy * stride + ky - 1;
              if (iy < 0 || iy >= edge) continue;
              for (int kx = 0; kx < 3; ++kx) {
                int ix = ox * stride + kx - 1;
                if (ix < 0 || ix >= edge) continue;
                acc += wbase[ky * 3 + kx] * plane[iy * edge + ix];
              }
            }
          }
          y[(static_cast<size_t>(oc) * oe + oy) * oe + ox] = acc;
        }
      }
    }
  }

  void backward(const T* x, int edge, const T* dy, T* dx) {
    int oe = out_edge(edge, stride);
    for (int oc = 0; oc < cout; ++oc) {
      for (int oy = 0; oy < oe; ++oy) {
        for (int ox = 0; ox < oe; ++ox) {
          T d = dy[(static_cast<size_t>(oc) * oe + oy) * oe + ox];
          if (d == T(0)) continue;
          b.g[static_cast<size_t>(oc)] += d;
          for (int ic = 0; ic < cin; ++ic) {
            const T* plane = x + static_cast<size_t>(ic) * edge * edge;
            T* dplane = dx ? dx + static_cast<size_t>(ic) * edge * edge : nullptr;
            size_t wbase = (static_cast<size_t>(oc) * cin + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
              int iy = oy * stride + ky - 1;
              if (iy < 0 || iy >= edge) continue;
              for (int kx = 0; kx < 3; ++kx) {
                int ix = ox * stride + kx - 1;
                if (ix < 0 || ix >= edge) continue;
                w.g[wbase + static_cast<size_t>(ky * 3 + kx)] += d * plane[iy * edge + ix];
                if (dplane) dplane[iy * edge + ix] += d * w.v[wbase + static_cast<size_t>(ky * 3 + kx)];
              }
            }
          }
        }
      }
    }
  }
};

// Architecture sizes derived from the grid spec. Hidden widths are fixed
// desk-scale choices.
struct NetDims {
  int local_m = 13;
  int global_n = 12;
  int conv_channels = 16;
  int image_embed = 64;
  int group_in = 16;
  int group_hidden = 32;
  int vec_embed = 128;
  int trunk_hidden = 256;

  int local_conv_edge() const { return Conv2dT<float>::out_edge(local_m, 2); }
  int global_conv_edge() const { return Conv2dT<float>::out_edge(global_n, 2); }
  int local_flat() const { return conv_channels * local_conv_edge() * local_conv_edge(); }
  int global_flat() const { return conv_channels * global_conv_edge() * global_conv_edge(); }
  int global_classes() const { return global_n * global_n; }
  int local_classes() const { return local_m * local_m; }
  int trunk_in() const {
    return vec_embed + 2 * image_embed + global_classes() + local_classes();
  }
  std::array<int, kNumLevel1> level2_spaces() const {
    return {kNumMoveBins, kNumTargetSlots, kNumMoveBins, kNumTargetSlots, local_classes(), 1, 1};
  }
};

inline NetDims net_dims(const GridSpec& grid) {
  NetDims d;
  d.local_m = grid.local_m;
  d.global_n = grid.global_n;
  return d;
}

struct SampleLabels {
  int level1 = -1;        // -1 = none (term skipped)
  int level2 = -1;
  int global_intent = -1;
  int local_intent = -1;
};

struct LossWeights {
  float a0 = 1.0f, a1 = 1.0f, bg = 1.0f, bl = 1.0f;
};

struct Prediction {
  std::vector<float> level1;                 // p^0, 7 classes
  std::array<std::vector<float>, kNumLevel1> level2;  // p^1..p^m
  std::vector<float> global_intent;          // p^{m+1}
  std::vector<float> local_intent;           // p^{m+2}
};

// Workspace for one sample's forward/backward pass.
template <typename T>
struct ActivationsT {
  // forward values
  std::vector<T> local_c1, local_c1_relu, local_c2, local_c2_relu, local_h;
  std::vector<T> global_c1, global_c1_relu, global_c2, global_c2_relu, global_h;
  std::vector<T> image_cat;                       // [h_l, h_g]
  std::vector<T> intent_g_logits, p_g, intent_l_logits, p_l;
  std::array<std::vector<T>, kVectorGroups> group_pre, group_relu;
  std::vector<T> group_cat, vec_h;
  std::vector<T> trunk_cat, trunk_pre, trunk_relu;
  std::vector<T> l1_logits, p0;
  std::array<std::vector<T>, kNumLevel1> l2_logits, p_l2;
  // backward scratch
  std::vector<T> d_local_c1, d_local_c1_relu, d_local_c2, d_local_c2_relu, d_local_h;
  std::vector<T> d_global_c1, d_global_c1_relu, d_global_c2, d_global_c2_relu, d_global_h;
  std::vector<T> d_image_cat, d_intent_g_logits, d_p_g, d_intent_l_logits, d_p_l;
  std::array<std::vector<T>, kVectorGroups> d_group_pre, d_group_relu;
  std::vector<T> d_group_cat, d_vec_h, d_trunk_cat, d_trunk_pre, d_trunk_relu;
  std::vector<T> d_l1_logits;
  std::array<std::vector<T>, kNumLevel1> d_l2_logits;

  explicit ActivationsT(const NetDims& d);
};

// The multimodal multitask network: two conv image encoders, eleven grouped
// vector encoders, intent heads whose softmax outputs feed the shared trunk,
// and hierarchical action heads.
template <typename T>
class NetworkT {
 public:
  explicit NetworkT(const NetDims& dims);

  const NetDims& dims() const { return dims_; }

  void init_params(uint64_t seed);
  void zero_grad();

  void forward(const T* vec, const T* local, const T* global, ActivationsT<T>& a) const;

  // Loss of the already-run forward pass in `a`.
  T loss(const ActivationsT<T>& a, const SampleLabels& y, const LossWeights& w) const;

  // Accumulates dloss/dparam into the parameter .g buffers.
  void backward(ActivationsT<T>& a, const T* vec, const T* local, const T* global,
                const SampleLabels& y, const LossWeights& w, bool stop_intent_gradient);

  Prediction predict(const ActivationsT<T>& a) const;

  // Fixed-order traversal of every parameter tensor; the order defines the
  // checkpoint layout, the Adam state layout and the architecture digest.
  void for_each_param(const std::function<void(const std::string&, TensorT<T>&)>& fn);
  void for_each_param(const std::function<void(const std::string&, const TensorT<T>&)>& fn) const;

  uint64_t architecture_digest() const;
  size_t parameter_count() const;

  // parameters
  Conv2dT<T> local_conv1, local_conv2;
  DenseT<T> local_fc;
  Conv2dT<T> global_conv1, global_conv2;
  DenseT<T> global_fc;
  std::array<DenseT<T>, kVectorGroups> group_fc;
  DenseT<T> vec_fc;
  DenseT<T> intent_global, intent_local;
  DenseT<T> trunk;
  DenseT<T> head_l1;
  std::array<DenseT<T>, kNumLevel1> head_l2;

 private:
  NetDims dims_;
};

using Network = NetworkT<float>;
using Activations = ActivationsT<float>;

// Copies parameter values (not grads) between precisions.
void widen_params(const NetworkT<float>& src, NetworkT<double>& dst);

template <typename T>
void softmax(const T* logits, int n, T* out);
template <typename T>
T log_sum_exp(const T* logits, int n);

}  // namespace moba
