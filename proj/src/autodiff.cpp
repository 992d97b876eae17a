#include "uwr/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "uwr/color.hpp"
#include "uwr/error.hpp"

namespace uwr {

namespace {

struct ConvShape {
  int cin, h, w, cout, k, pad;
};

}  // namespace

int Tape::push(Node n) {
  n.value.resize(static_cast<size_t>(n.dims.numel()));
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

const Tape::Node& Tape::node(const DiffTensor& t) const {
  if (t.id < 0 || t.id >= static_cast<int>(nodes_.size()))
    throw ValidationError("tape: invalid tensor handle");
  return nodes_[t.id];
}

DiffTensor Tape::leaf(const Dims& dims, bool requires_grad) {
  Node n;
  n.op = Op::kLeaf;
  n.dims = dims;
  n.needs_grad = requires_grad;
  const int id = push(std::move(n));
  return {id, dims};
}

void Tape::set_value(const DiffTensor& t, std::span<const float> v) {
  Node& n = nodes_.at(t.id);
  if (v.size() != n.value.size()) throw ValidationError("tape: value size mismatch");
  std::copy(v.begin(), v.end(), n.value.begin());
}

void Tape::set_value(const DiffTensor& t, const Image& img) {
  Node& n = nodes_.at(t.id);
  if (static_cast<size_t>(img.size()) != n.value.size())
    throw ValidationError("tape: image size mismatch");
  for (size_t i = 0; i < n.value.size(); ++i)
    n.value[i] = static_cast<float>(img.data[i]);
}

DiffTensor Tape::conv2d(const DiffTensor& x, const DiffTensor& w, const DiffTensor& b) {
  const Node& nx = node(x);
  const Node& nw = node(w);
  const Node& nb = node(b);
  if (nx.dims.n != 3 || nw.dims.n != 4 || nb.dims.n != 1)
    throw ValidationError("conv2d: rank mismatch");
  const int cin = nx.dims.d[0], h = nx.dims.d[1], wd = nx.dims.d[2];
  const int cout = nw.dims.d[0], k = nw.dims.d[2];
  if (nw.dims.d[1] != cin || nw.dims.d[3] != k || nb.dims.d[0] != cout)
    throw ValidationError("conv2d: channel/kernel mismatch");
  if (k % 2 == 0) throw ValidationError("conv2d: kernel size must be odd");
  Node n;
  n.op = Op::kConv2d;
  n.dims = Dims::chw(cout, h, wd);
  n.a = x.id;
  n.b = w.id;
  n.c = b.id;
  n.needs_grad = nx.needs_grad || nw.needs_grad || nb.needs_grad;
  const int id = push(std::move(n));
  return {id, nodes_[id].dims};
}

DiffTensor Tape::relu(const DiffTensor& x) {
  Node n;
  n.op = Op::kRelu;
  n.dims = node(x).dims;
  n.a = x.id;
  n.needs_grad = node(x).needs_grad;
  const int id = push(std::move(n));
  return {id, nodes_[id].dims};
}

DiffTensor Tape::sigmoid(const DiffTensor& x) {
  Node n;
  n.op = Op::kSigmoid;
  n.dims = node(x).dims;
  n.a = x.id;
  n.needs_grad = node(x).needs_grad;
  const int id = push(std::move(n));
  return {id, nodes_[id].dims};
}

DiffTensor Tape::add(const DiffTensor& a, const DiffTensor& b) {
  if (!(node(a).dims == node(b).dims)) throw ValidationError("add: shape mismatch");
  Node n;
  n.op = Op::kAdd;
  n.dims = node(a).dims;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  const int id = push(std::move(n));
  return {id, nodes_[id].dims};
}

DiffTensor Tape::sub(const DiffTensor& a, const DiffTensor& b) {
  if (!(node(a).dims == node(b).dims)) throw ValidationError("sub: shape mismatch");
  Node n;
  n.op = Op::kSub;
  n.dims = node(a).dims;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  const int id = push(std::move(n));
  return {id, nodes_[id].dims};
}

DiffTensor Tape::mul(const DiffTensor& a, const DiffTensor& b) {
  if (!(node(a).dims == node(b).dims)) throw ValidationError("mul: shape mismatch");
  Node n;
  n.op = Op::kMul;
  n.dims = node(a).dims;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  const int id = push(std::move(n));
  return {id, nodes_[id].dims};
}

DiffTensor Tape::scale(const DiffTensor& a, double s) {
  Node n;
  n.op = Op::kScale;
  n.dims = node(a).dims;
  n.a = a.id;
  n.sarg = s;
  n.needs_grad = node(a).needs_grad;
  const int id = push(std::move(n));
  return {id, nodes_[id].dims};
}

namespace {
Dims reduced_dims(const Dims& in, Region region) {
  if (region == Region::kAll) return Dims::scalar();
  if (in.n != 3) throw ValidationError("reduce: per-channel region needs a CHW tensor");
  return Dims::vec(in.d[0]);
}
}  // namespace

DiffTensor Tape::sum(const DiffTensor& x, Region region) {
  if (node(x).dims.numel() == 0) throw ValidationError("reduce: empty region");
  Node n;
  n.op = Op::kSum;
  n.dims = reduced_dims(node(x).dims, region);
  n.a = x.id;
  n.region = region;
  n.needs_grad = node(x).needs_grad;
  const int id = push(std::move(n));
  return {id, nodes_[id].dims};
}

DiffTensor Tape::mean(const DiffTensor& x, Region region) {
  if (node(x).dims.numel() == 0) throw ValidationError("reduce: empty region");
  Node n;
  n.op = Op::kMean;
  n.dims = reduced_dims(node(x).dims, region);
  n.a = x.id;
  n.region = region;
  n.needs_grad = node(x).needs_grad;
  const int id = push(std::move(n));
  return {id, nodes_[id].dims};
}

DiffTensor Tape::l2norm(const DiffTensor& x, Region region) {
  if (node(x).dims.numel() == 0) throw ValidationError("reduce: empty region");
  Node n;
  n.op = Op::kL2Norm;
  n.dims = reduced_dims(node(x).dims, region);
  n.a = x.id;
  n.region = region;
  n.needs_grad = node(x).needs_grad;
  const int id = push(std::move(n));
  return {id, nodes_[id].dims};
}

DiffTensor Tape::color_transform(const DiffTensor& x) {
  const Node& nx = node(x);
  if (nx.dims.n != 3 || nx.dims.d[0] != 3)
    throw ValidationError("color_transform: input must have 3 channels");
  Node n;
  n.op = Op::kColorTransform;
  n.dims = nx.dims;
  n.a = x.id;
  n.needs_grad = nx.needs_grad;
  const int id = push(std::move(n));
  return {id, nodes_[id].dims};
}

DiffTensor Tape::channel_affine(const DiffTensor& x, const DiffTensor& a,
                                const DiffTensor& b) {
  const Node& nx = node(x);
  if (nx.dims.n != 3 || nx.dims.d[0] != 3)
    throw ValidationError("channel_affine: input must have 3 channels");
  if (node(a).dims.numel() != 3 || node(b).dims.numel() != 3)
    throw ValidationError("channel_affine: a, b must have 3 elements");
  Node n;
  n.op = Op::kChannelAffine;
  n.dims = nx.dims;
  n.a = x.id;
  n.b = a.id;
  n.c = b.id;
  n.needs_grad = nx.needs_grad || node(a).needs_grad || node(b).needs_grad;
  const int id = push(std::move(n));
  return {id, nodes_[id].dims};
}

void Tape::compute(Node& n) {
  const long total = n.dims.numel();
  switch (n.op) {
    case Op::kLeaf:
      break;
    case Op::kConv2d: {
      const Node& nx = nodes_[n.a];
      const Node& nw = nodes_[n.b];
      const Node& nb = nodes_[n.c];
      const ConvShape s{nx.dims.d[0], nx.dims.d[1], nx.dims.d[2],
                        nw.dims.d[0], nw.dims.d[2], nw.dims.d[2] / 2};
      const long plane = static_cast<long>(s.h) * s.w;
      for (int co = 0; co < s.cout; ++co) {
        float* op = n.value.data() + co * plane;
        std::fill(op, op + plane, nb.value[co]);
        for (int ci = 0; ci < s.cin; ++ci) {
          const float* ip = nx.value.data() + ci * plane;
          const float* wp = nw.value.data() + (static_cast<long>(co) * s.cin + ci) * s.k * s.k;
          for (int ky = 0; ky < s.k; ++ky) {
            const int dy = ky - s.pad;
            const int y0 = std::max(0, -dy), y1 = s.h - std::max(0, dy);
            for (int kx = 0; kx < s.k; ++kx) {
              const int dx = kx - s.pad;
              const int x0 = std::max(0, -dx), x1 = s.w - std::max(0, dx);
              const float wv = wp[ky * s.k + kx];
              for (int y = y0; y < y1; ++y) {
                float* orow = op + static_cast<long>(y) * s.w;
                const float* irow = ip + static_cast<long>(y + dy) * s.w + dx;
                for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
              }
            }
          }
        }
      }
      break;
    }
    case Op::kRelu: {
      const std::vector<float>& a = nodes_[n.a].value;
      for (long i = 0; i < total; ++i) n.value[i] = a[i] > 0.0f ? a[i] : 0.0f;
      break;
    }
    case Op::kSigmoid: {
      const std::vector<float>& a = nodes_[n.a].value;
      for (long i = 0; i < total; ++i) n.value[i] = 1.0f / (1.0f + std::exp(-a[i]));
      break;
    }
    case Op::kAdd: {
      const std::vector<float>& a = nodes_[n.a].value;
      const std::vector<float>& b = nodes_[n.b].value;
      for (long i = 0; i < total; ++i) n.value[i] = a[i] + b[i];
      break;
    }
    case Op::kSub: {
      const std::vector<float>& a = nodes_[n.a].value;
      const std::vector<float>& b = nodes_[n.b].value;
      for (long i = 0; i < total; ++i) n.value[i] = a[i] - b[i];
      break;
    }
    case Op::kMul: {
      const std::vector<float>& a = nodes_[n.a].value;
      const std::vector<float>& b = nodes_[n.b].value;
      for (long i = 0; i < total; ++i) n.value[i] = a[i] * b[i];
      break;
    }
    case Op::kScale: {
      const std::vector<float>& a = nodes_[n.a].value;
      const float s = static_cast<float>(n.sarg);
      for (long i = 0; i < total; ++i) n.value[i] = s * a[i];
      break;
    }
    case Op::kSum:
    case Op::kMean:
    case Op::kL2Norm: {
      const Node& na = nodes_[n.a];
      const long in_total = na.dims.numel();
      const long groups = (n.region == Region::kAll) ? 1 : na.dims.d[0];
      const long glen = in_total / groups;
      for (long g = 0; g < groups; ++g) {
        const float* p = na.value.data() + g * glen;
        double acc = 0.0;
        if (n.op == Op::kL2Norm) {
          for (long i = 0; i < glen; ++i) acc += static_cast<double>(p[i]) * p[i];
          n.value[g] = static_cast<float>(std::sqrt(acc));
        } else {
          for (long i = 0; i < glen; ++i) acc += p[i];
          if (n.op == Op::kMean) acc /= static_cast<double>(glen);
          n.value[g] = static_cast<float>(acc);
        }
      }
      break;
    }
    case Op::kColorTransform: {
      const Node& na = nodes_[n.a];
      const long plane = static_cast<long>(n.dims.d[1]) * n.dims.d[2];
      const float* r = na.value.data();
      const float* g = r + plane;
      const float* b = g + plane;
      for (int ch = 0; ch < 3; ++ch) {
        float* o = n.value.data() + ch * plane;
        const double m0 = kRgbToYuv[ch][0], m1 = kRgbToYuv[ch][1], m2 = kRgbToYuv[ch][2];
        for (long i = 0; i < plane; ++i)
          o[i] = static_cast<float>(m0 * r[i] + m1 * g[i] + m2 * b[i]);
      }
      break;
    }
    case Op::kChannelAffine: {
      const Node& nx = nodes_[n.a];
      const Node& na = nodes_[n.b];
      const Node& nb = nodes_[n.c];
      const long plane = static_cast<long>(n.dims.d[1]) * n.dims.d[2];
      for (int c = 0; c < 3; ++c) {
        const float a = na.value[c], b = nb.value[c];
        const float* x = nx.value.data() + c * plane;
        float* o = n.value.data() + c * plane;
        for (long i = 0; i < plane; ++i) o[i] = a * x[i] + b;
      }
      break;
    }
  }
}

void Tape::forward() {
  for (Node& n : nodes_)
    if (n.op != Op::kLeaf) compute(n);
}

void Tape::backprop(const Node& n) {
  const long total = n.dims.numel();
  switch (n.op) {
    case Op::kLeaf:
      break;
    case Op::kConv2d: {
      Node& nx = nodes_[n.a];
      Node& nw = nodes_[n.b];
      Node& nb = nodes_[n.c];
      const ConvShape s{nx.dims.d[0], nx.dims.d[1], nx.dims.d[2],
                        nw.dims.d[0], nw.dims.d[2], nw.dims.d[2] / 2};
      const long plane = static_cast<long>(s.h) * s.w;
      if (nb.needs_grad) {
        for (int co = 0; co < s.cout; ++co) {
          const double* gp = n.grad.data() + co * plane;
          double acc = 0.0;
          for (long i = 0; i < plane; ++i) acc += gp[i];
          nb.grad[co] += acc;
        }
      }
      if (nx.needs_grad) {
        for (int co = 0; co < s.cout; ++co) {
          const double* gp = n.grad.data() + co * plane;
          for (int ci = 0; ci < s.cin; ++ci) {
            double* gip = nx.grad.data() + ci * plane;
            const float* wp = nw.value.data() + (static_cast<long>(co) * s.cin + ci) * s.k * s.k;
            for (int ky = 0; ky < s.k; ++ky) {
              const int dy = ky - s.pad;
              const int y0 = std::max(0, -dy), y1 = s.h - std::max(0, dy);
              for (int kx = 0; kx < s.k; ++kx) {
                const int dx = kx - s.pad;
                const int x0 = std::max(0, -dx), x1 = s.w - std::max(0, dx);
                const double wv = wp[ky * s.k + kx];
                for (int y = y0; y < y1; ++y) {
                  double* girow = gip + static_cast<long>(y + dy) * s.w + dx;
                  const double* gorow = gp + static_cast<long>(y) * s.w;
                  for (int x = x0; x < x1; ++x) girow[x] += wv * gorow[x];
                }
              }
            }
          }
        }
      }
      if (nw.needs_grad) {
        for (int co = 0; co < s.cout; ++co) {
          const double* gp = n.grad.data() + co * plane;
          for (int ci = 0; ci < s.cin; ++ci) {
            const float* ip = nx.value.data() + ci * plane;
            double* gwp = nw.grad.data() + (static_cast<long>(co) * s.cin + ci) * s.k * s.k;
            for (int ky = 0; ky < s.k; ++ky) {
              const int dy = ky - s.pad;
              const int y0 = std::max(0, -dy), y1 = s.h - std::max(0, dy);
              for (int kx = 0; kx < s.k; ++kx) {
                const int dx = kx - s.pad;
                const int x0 = std::max(0, -dx), x1 = s.w - std::max(0, dx);
                double acc = 0.0;
                for (int y = y0; y < y1; ++y) {
                  const double* gorow = gp + static_cast<long>(y) * s.w + x0;
                  const float* irow = ip + static_cast<long>(y + dy) * s.w + dx + x0;
                  for (int x = 0; x < x1 - x0; ++x) acc += gorow[x] * irow[x];
                }
                gwp[ky * s.k + kx] += acc;
              }
            }
          }
        }
      }
      break;
    }
    case Op::kRelu: {
      Node& na = nodes_[n.a];
      if (!na.needs_grad) break;
      for (long i = 0; i < total; ++i)
        if (na.value[i] > 0.0f) na.grad[i] += n.grad[i];
      break;
    }
    case Op::kSigmoid: {
      Node& na = nodes_[n.a];
      if (!na.needs_grad) break;
      for (long i = 0; i < total; ++i) {
        // Recompute s in double from the pre-activation: the stored float
        // output rounds 1 - s to zero digits when s saturates toward 1.
        const double s = 1.0 / (1.0 + std::exp(-static_cast<double>(na.value[i])));
        na.grad[i] += n.grad[i] * s * (1.0 - s);
      }
      break;
    }
    case Op::kAdd: {
      Node& na = nodes_[n.a];
      Node& nb = nodes_[n.b];
      if (na.needs_grad)
        for (long i = 0; i < total; ++i) na.grad[i] += n.grad[i];
      if (nb.needs_grad)
        for (long i = 0; i < total; ++i) nb.grad[i] += n.grad[i];
      break;
    }
    case Op::kSub: {
      Node& na = nodes_[n.a];
      Node& nb = nodes_[n.b];
      if (na.needs_grad)
        for (long i = 0; i < total; ++i) na.grad[i] += n.grad[i];
      if (nb.needs_grad)
        for (long i = 0; i < total; ++i) nb.grad[i] -= n.grad[i];
      break;
    }
    case Op::kMul: {
      Node& na = nodes_[n.a];
      Node& nb = nodes_[n.b];
      if (na.needs_grad)
        for (long i = 0; i < total; ++i) na.grad[i] += n.grad[i] * nb.value[i];
      if (nb.needs_grad)
        for (long i = 0; i < total; ++i) nb.grad[i] += n.grad[i] * na.value[i];
      break;
    }
    case Op::kScale: {
      Node& na = nodes_[n.a];
      if (!na.needs_grad) break;
      for (long i = 0; i < total; ++i) na.grad[i] += n.sarg * n.grad[i];
      break;
    }
    case Op::kSum:
    case Op::kMean:
    case Op::kL2Norm: {
      Node& na = nodes_[n.a];
      if (!na.needs_grad) break;
      const long in_total = na.dims.numel();
      const long groups = (n.region == Region::kAll) ? 1 : na.dims.d[0];
      const long glen = in_total / groups;
      for (long g = 0; g < groups; ++g) {
        const double go = n.grad[g];
        double* gi = na.grad.data() + g * glen;
        const float* v = na.value.data() + g * glen;
        if (n.op == Op::kSum) {
          for (long i = 0; i < glen; ++i) gi[i] += go;
        } else if (n.op == Op::kMean) {
          const double inv = 1.0 / static_cast<double>(glen);
          for (long i = 0; i < glen; ++i) gi[i] += go * inv;
        } else {
          const double norm = n.value[g];
          if (norm > 0.0) {
            const double c = go / norm;
            for (long i = 0; i < glen; ++i) gi[i] += c * v[i];
          }
          // zero subgradient at the zero vector
        }
      }
      break;
    }
    case Op::kColorTransform: {
      Node& na = nodes_[n.a];
      if (!na.needs_grad) break;
      const long plane = static_cast<long>(n.dims.d[1]) * n.dims.d[2];
      for (int in_ch = 0; in_ch < 3; ++in_ch) {
        double* gi = na.grad.data() + in_ch * plane;
        const double m0 = kRgbToYuv[0][in_ch], m1 = kRgbToYuv[1][in_ch],
                     m2 = kRgbToYuv[2][in_ch];
        const double* g0 = n.grad.data();
        const double* g1 = g0 + plane;
        const double* g2 = g1 + plane;
        for (long i = 0; i < plane; ++i)
          gi[i] += m0 * g0[i] + m1 * g1[i] + m2 * g2[i];
      }
      break;
    }
    case Op::kChannelAffine: {
      Node& nx = nodes_[n.a];
      Node& na = nodes_[n.b];
      Node& nb = nodes_[n.c];
      const long plane = static_cast<long>(n.dims.d[1]) * n.dims.d[2];
      for (int c = 0; c < 3; ++c) {
        const double* g = n.grad.data() + c * plane;
        const float* x = nx.value.data() + c * plane;
        if (nx.needs_grad) {
          const double a = na.value[c];
          double* gx = nx.grad.data() + c * plane;
          for (long i = 0; i < plane; ++i) gx[i] += a * g[i];
        }
        if (na.needs_grad) {
          double acc = 0.0;
          for (long i = 0; i < plane; ++i) acc += g[i] * x[i];
          na.grad[c] += acc;
        }
        if (nb.needs_grad) {
          double acc = 0.0;
          for (long i = 0; i < plane; ++i) acc += g[i];
          nb.grad[c] += acc;
        }
      }
      break;
    }
  }
}

void Tape::backward(const DiffTensor& loss) {
  const Node& ln = node(loss);
  if (!(ln.dims == Dims::scalar())) throw ValidationError("backward: loss must be scalar");
  if (!ln.needs_grad) return;  // no differentiable leaf feeds the loss
  for (Node& n : nodes_) {
    if (!n.needs_grad) continue;
    n.grad.assign(n.value.size(), 0.0);
  }
  nodes_[loss.id].grad[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    const Node& n = nodes_[i];
    if (n.needs_grad && n.op != Op::kLeaf) backprop(n);
  }
}

std::span<const float> Tape::value(const DiffTensor& t) const {
  return {node(t).value.data(), node(t).value.size()};
}

std::span<const double> Tape::grad(const DiffTensor& t) const {
  const Node& n = node(t);
  if (n.grad.size() != n.value.size())
    throw ValidationError("tape: gradient not populated (run backward)");
  return {n.grad.data(), n.grad.size()};
}

double Tape::scalar(const DiffTensor& t) const {
  const Node& n = node(t);
  if (n.value.size() != 1) throw ValidationError("tape: not a scalar");
  return n.value[0];
}

namespace {
template <class T>
Image span_to_image(std::span<const T> v, const Dims& dims) {
  if (dims.n != 3 || dims.d[0] != 3)
    throw ValidationError("tape: tensor is not a 3-channel image");
  Image img(dims.d[1], dims.d[2]);
  for (size_t i = 0; i < v.size(); ++i) img.data[i] = v[i];
  return img;
}
}  // namespace

Image Tape::value_as_image(const DiffTensor& t) const {
  return span_to_image(value(t), node(t).dims);
}

Image Tape::grad_as_image(const DiffTensor& t) const {
  return span_to_image(grad(t), node(t).dims);
}

double Tape::eval_f64(const DiffTensor& out, int leaf_id, long coord,
                      double delta) const {
  if (node(out).value.size() != 1)
    throw ValidationError("eval_f64: output must be scalar");
  std::vector<std::vector<double>> vals(out.id + 1);
  for (int i = 0; i <= out.id; ++i) {
    const Node& n = nodes_[i];
    const long total = n.dims.numel();
    std::vector<double>& v = vals[i];
    v.resize(total);
    switch (n.op) {
      case Op::kLeaf: {
        for (long j = 0; j < total; ++j) v[j] = n.value[j];
        if (i == leaf_id) v.at(coord) += delta;
        break;
      }
      case Op::kConv2d: {
        const Node& nx = nodes_[n.a];
        const Node& nw = nodes_[n.b];
        const ConvShape s{nx.dims.d[0], nx.dims.d[1], nx.dims.d[2],
                          nw.dims.d[0], nw.dims.d[2], nw.dims.d[2] / 2};
        const long plane = static_cast<long>(s.h) * s.w;
        const std::vector<double>& xin = vals[n.a];
        const std::vector<double>& wv = vals[n.b];
        const std::vector<double>& bv = vals[n.c];
        for (int co = 0; co < s.cout; ++co)
          for (int y = 0; y < s.h; ++y)
            for (int x = 0; x < s.w; ++x) {
              double acc = bv[co];
              for (int ci = 0; ci < s.cin; ++ci)
                for (int ky = 0; ky < s.k; ++ky) {
                  const int yy = y + ky - s.pad;
                  if (yy < 0 || yy >= s.h) continue;
                  for (int kx = 0; kx < s.k; ++kx) {
                    const int xx = x + kx - s.pad;
                    if (xx < 0 || xx >= s.w) continue;
                    acc += wv[(static_cast<long>(co) * s.cin + ci) * s.k * s.k + ky * s.k + kx] *
                           xin[ci * plane + static_cast<long>(yy) * s.w + xx];
                  }
                }
              v[co * plane + static_cast<long>(y) * s.w + x] = acc;
            }
        break;
      }
      case Op::kRelu:
        for (long j = 0; j < total; ++j)
          v[j] = vals[n.a][j] > 0.0 ? vals[n.a][j] : 0.0;
        break;
      case Op::kSigmoid:
        for (long j = 0; j < total; ++j) v[j] = 1.0 / (1.0 + std::exp(-vals[n.a][j]));
        break;
      case Op::kAdd:
        for (long j = 0; j < total; ++j) v[j] = vals[n.a][j] + vals[n.b][j];
        break;
      case Op::kSub:
        for (long j = 0; j < total; ++j) v[j] = vals[n.a][j] - vals[n.b][j];
        break;
      case Op::kMul:
        for (long j = 0; j < total; ++j) v[j] = vals[n.a][j] * vals[n.b][j];
        break;
      case Op::kScale:
        for (long j = 0; j < total; ++j) v[j] = n.sarg * vals[n.a][j];
        break;
      case Op::kSum:
      case Op::kMean:
      case Op::kL2Norm: {
        const Node& na = nodes_[n.a];
        const long in_total = na.dims.numel();
        const long groups = (n.region == Region::kAll) ? 1 : na.dims.d[0];
        const long glen = in_total / groups;
        for (long g = 0; g < groups; ++g) {
          const double* p = vals[n.a].data() + g * glen;
          double acc = 0.0;
          if (n.op == Op::kL2Norm) {
            for (long j = 0; j < glen; ++j) acc += p[j] * p[j];
            v[g] = std::sqrt(acc);
          } else {
            for (long j = 0; j < glen; ++j) acc += p[j];
            v[g] = (n.op == Op::kMean) ? acc / static_cast<double>(glen) : acc;
          }
        }
        break;
      }
      case Op::kColorTransform: {
        const long plane = static_cast<long>(n.dims.d[1]) * n.dims.d[2];
        const std::vector<double>& xin = vals[n.a];
        for (int ch = 0; ch < 3; ++ch)
          for (long j = 0; j < plane; ++j)
            v[ch * plane + j] = kRgbToYuv[ch][0] * xin[j] +
                                kRgbToYuv[ch][1] * xin[plane + j] +
                                kRgbToYuv[ch][2] * xin[2 * plane + j];
        break;
      }
      case Op::kChannelAffine: {
        const long plane = static_cast<long>(n.dims.d[1]) * n.dims.d[2];
        for (int c = 0; c < 3; ++c)
          for (long j = 0; j < plane; ++j)
            v[c * plane + j] = vals[n.b][c] * vals[n.a][c * plane + j] + vals[n.c][c];
        break;
      }
    }
  }
  const double r = vals[out.id][0];
  if (!std::isfinite(r)) throw ValidationError("eval_f64: non-finite evaluation");
  return r;
}

double grad_check(Tape& tape, const DiffTensor& loss,
                  const std::vector<DiffTensor>& leaves, double h) {
  tape.forward();
  tape.backward(loss);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(leaves.size());
  for (const DiffTensor& l : leaves) {
    const auto g = tape.grad(l);
    analytic.emplace_back(g.begin(), g.end());
  }
  double max_rel = 0.0;
  for (size_t li = 0; li < leaves.size(); ++li) {
    const DiffTensor& l = leaves[li];
    const long total = l.dims.numel();
    for (long j = 0; j < total; ++j) {
      const double fp = tape.eval_f64(loss, l.id, j, h);
      const double fm = tape.eval_f64(loss, l.id, j, -h);
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[li][j];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      max_rel = std::max(max_rel, std::fabs(a - numeric) / denom);
    }
  }
  return max_rel;
}

GradReport collect_grads(
    const Tape& tape,
    const std::vector<std::pair<std::string, DiffTensor>>& named) {
  GradReport r;
  r.grads.reserve(named.size());
  for (const auto& [name, t] : named) {
    const auto g = tape.grad(t);
    r.grads.emplace_back(name, std::vector<double>(g.begin(), g.end()));
  }
  return r;
}

}  // namespace uwr
