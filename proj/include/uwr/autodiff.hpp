#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uwr/image.hpp"

namespace uwr {

/// Tensor shape: n = 0 means scalar, otherwise d[0..n-1] are extents.
struct Dims {
  int n = 0;
  std::array<int, 4> d{1, 1, 1, 1};

  static Dims scalar() { return {}; }
  static Dims vec(int k) { return {1, {k, 1, 1, 1}}; }
  static Dims chw(int c, int h, int w) { return {3, {c, h, w, 1}}; }
  static Dims conv_weights(int cout, int cin, int k) { return {4, {cout, cin, k, k}}; }

  long numel() const {
    long p = 1;
    for (int i = 0; i < n; ++i) p *= d[i];
    return p;
  }
  bool operator==(const Dims&) const = default;
};

enum class Region { kAll, kPerChannel };

/// Handle to a node on a Tape. Cheap to copy; valid only for its tape.
struct DiffTensor {
  int id = -1;
  Dims dims;
};

/// Named gradients pulled off a tape after backward(), plus the max relative
/// error against finite differences when a check has been run.
struct GradReport {
  std::vector<std::pair<std::string, std::vector<double>>> grads;
  double max_rel_error = 0.0;
};

/// Append-only reverse-mode tape. Values are float32 tensors with float64
/// accumulation in reductions; gradients are stored and accumulated in
/// float64, which keeps long backward chains from drowning small derivatives
/// in rounding noise. Node values are recomputed in insertion order by
/// forward(), so a built tape can be replayed with fresh leaf values without
/// reallocation.
class Tape {
 public:
  DiffTensor leaf(const Dims& dims, bool requires_grad);
  void set_value(const DiffTensor& t, std::span<const float> v);
  void set_value(const DiffTensor& t, const Image& img);

  /// Stride-1 cross-correlation with zero "same" padding; odd square kernels.
  /// x: (Cin,H,W); w: (Cout,Cin,k,k); b: (Cout) -> (Cout,H,W).
  DiffTensor conv2d(const DiffTensor& x, const DiffTensor& w, const DiffTensor& b);
  DiffTensor relu(const DiffTensor& x);
  DiffTensor sigmoid(const DiffTensor& x);
  DiffTensor add(const DiffTensor& a, const DiffTensor& b);
  DiffTensor sub(const DiffTensor& a, const DiffTensor& b);
  DiffTensor mul(const DiffTensor& a, const DiffTensor& b);
  DiffTensor scale(const DiffTensor& a, double s);
  DiffTensor sum(const DiffTensor& x, Region region = Region::kAll);
  DiffTensor mean(const DiffTensor& x, Region region = Region::kAll);
  /// sqrt(sum of squares); gradient at the zero vector is defined as 0.
  DiffTensor l2norm(const DiffTensor& x, Region region = Region::kAll);
  /// Differentiable RGB->YUV; forward matches rgb_to_yuv, backward is the
  /// transposed matrix. Requires a (3,H,W) input.
  DiffTensor color_transform(const DiffTensor& x);
  /// out_c = a_c * x_c + b_c with per-channel scalars a, b (both length 3).
  DiffTensor channel_affine(const DiffTensor& x, const DiffTensor& a,
                            const DiffTensor& b);

  /// Recomputes every non-leaf value in insertion order.
  void forward();
  /// Seeds d(loss)=1 and accumulates gradients into every node reachable from
  /// a requires_grad leaf. loss must be scalar.
  void backward(const DiffTensor& loss);

  std::span<const float> value(const DiffTensor& t) const;
  std::span<const double> grad(const DiffTensor& t) const;
  double scalar(const DiffTensor& t) const;
  Image value_as_image(const DiffTensor& t) const;
  Image grad_as_image(const DiffTensor& t) const;

  /// Double-precision scalar re-evaluation of `out` from current leaf values,
  /// optionally with leaf coordinate (leaf_id, coord) shifted by delta.
  /// Serves as the finite-difference oracle.
  double eval_f64(const DiffTensor& out, int leaf_id = -1, long coord = -1,
                  double delta = 0.0) const;

  size_t size() const { return nodes_.size(); }

 private:
  enum class Op : uint8_t {
    kLeaf, kConv2d, kRelu, kSigmoid, kAdd, kSub, kMul, kScale,
    kSum, kMean, kL2Norm, kColorTransform, kChannelAffine,
  };
  struct Node {
    Op op;
    Dims dims;
    int a = -1, b = -1, c = -1;  // parent ids
    double sarg = 0.0;           // scale factor
    Region region = Region::kAll;
    bool needs_grad = false;
    std::vector<float> value;
    std::vector<double> grad;
  };

  int push(Node n);
  const Node& node(const DiffTensor& t) const;
  void compute(Node& n);
  void backprop(const Node& n);

  std::vector<Node> nodes_;
};

/// Max relative error between tape gradients and central finite differences
/// (step h) over every coordinate of `leaves`, with denominator
/// max(|analytic|, |numeric|, 1e-8). Runs forward() and backward(loss).
double grad_check(Tape& tape, const DiffTensor& loss,
                  const std::vector<DiffTensor>& leaves, double h);

/// Convenience: backward() must already have run; copies named gradients.
GradReport collect_grads(const Tape& tape,
                         const std::vector<std::pair<std::string, DiffTensor>>& named);

}  // namespace uwr
