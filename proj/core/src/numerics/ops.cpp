#include "vot/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vot/errors.hpp"

namespace vot::numerics {

namespace {

using DataPtr = std::shared_ptr<TensorData>;

[[noreturn]] void shape_fail(std::string_view op, const Shape& a,
                             const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) +
                   " and " + shape_str(b));
}

[[noreturn]] void shape_fail(std::string_view op, const Shape& a,
                             const std::string& why) {
  throw ShapeError(std::string(op) + ": shape " + shape_str(a) + " " + why);
}

// c[m,n] += a[m,k] * b[k,n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

// c[m,k] += a[m,n] * b[k,n]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * n;
    double* ci = c + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* bp = b + p * n;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += ai[j] * bp[j];
      ci[p] += s;
    }
  }
}

// c[k,n] += a[m,k]^T * g[m,n]
void gemm_tn(const double* a, const double* g, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    const double* gi = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      double* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += aip * gi[j];
    }
  }
}

void record(std::string_view op, std::vector<DataPtr> inputs,
            const Tensor& out, std::function<void()> fn) {
  Tape::current()->record(op, std::move(inputs), out.impl(), std::move(fn));
}

std::size_t last_dim(const Tensor& x, std::string_view op) {
  if (x.rank() == 0) shape_fail(op, x.shape(), "needs at least one axis");
  return x.shape().back();
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    const bool bias_ok = b.rank() == 1 && a.rank() >= 1 &&
                         a.shape().back() == b.dim(0);
    if (!bias_ok) shape_fail("add", a.shape(), b.shape());
  }
  const auto av = a.values();
  const auto bv = b.values();
  const std::size_t nb = bv.size();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i % nb];
  Tensor y(a.shape(), std::move(out));
  if (needs_recording({&a, &b})) {
    DataPtr ad = a.impl(), bd = b.impl(), yd = y.impl();
    record("add", {ad, bd}, y, [ad, bd, yd, nb] {
      const auto& g = yd->grad;
      if (ad->requires_grad) {
        for (std::size_t i = 0; i < g.size(); ++i) ad->grad[i] += g[i];
      }
      if (bd->requires_grad) {
        for (std::size_t i = 0; i < g.size(); ++i) bd->grad[i % nb] += g[i];
      }
    });
  }
  return y;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_fail("sub", a.shape(), b.shape());
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  Tensor y(a.shape(), std::move(out));
  if (needs_recording({&a, &b})) {
    DataPtr ad = a.impl(), bd = b.impl(), yd = y.impl();
    record("sub", {ad, bd}, y, [ad, bd, yd] {
      const auto& g = yd->grad;
      if (ad->requires_grad) {
        for (std::size_t i = 0; i < g.size(); ++i) ad->grad[i] += g[i];
      }
      if (bd->requires_grad) {
        for (std::size_t i = 0; i < g.size(); ++i) bd->grad[i] -= g[i];
      }
    });
  }
  return y;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_fail("mul", a.shape(), b.shape());
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  Tensor y(a.shape(), std::move(out));
  if (needs_recording({&a, &b})) {
    DataPtr ad = a.impl(), bd = b.impl(), yd = y.impl();
    record("mul", {ad, bd}, y, [ad, bd, yd] {
      const auto& g = yd->grad;
      if (ad->requires_grad) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          ad->grad[i] += g[i] * bd->value[i];
        }
      }
      if (bd->requires_grad) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          bd->grad[i] += g[i] * ad->value[i];
        }
      }
    });
  }
  return y;
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v *= factor;
  Tensor y(a.shape(), std::move(out));
  if (needs_recording({&a})) {
    DataPtr ad = a.impl(), yd = y.impl();
    record("scale", {ad}, y, [ad, yd, factor] {
      for (std::size_t i = 0; i < yd->grad.size(); ++i) {
        ad->grad[i] += factor * yd->grad[i];
      }
    });
  }
  return y;
}

Tensor abs(const Tensor& a) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v = std::abs(v);
  Tensor y(a.shape(), std::move(out));
  if (needs_recording({&a})) {
    DataPtr ad = a.impl(), yd = y.impl();
    record("abs", {ad}, y, [ad, yd] {
      for (std::size_t i = 0; i < yd->grad.size(); ++i) {
        const double x = ad->value[i];
        const double sign = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
        ad->grad[i] += sign * yd->grad[i];
      }
    });
  }
  return y;
}

Tensor gelu(const Tensor& a) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  std::vector<double> out(a.numel());
  const auto av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.5 * av[i] * (1.0 + std::erf(av[i] * kInvSqrt2));
  }
  Tensor y(a.shape(), std::move(out));
  if (needs_recording({&a})) {
    DataPtr ad = a.impl(), yd = y.impl();
    record("gelu", {ad}, y, [ad, yd] {
      constexpr double kInvSqrt2Pi = 0.39894228040143267794;
      for (std::size_t i = 0; i < yd->grad.size(); ++i) {
        const double x = ad->value[i];
        const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
        const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
        ad->grad[i] += yd->grad[i] * (cdf + x * pdf);
      }
    });
  }
  return y;
}

Tensor sum(const Tensor& a) {
  const auto av = a.values();
  Tensor y = Tensor::scalar(std::accumulate(av.begin(), av.end(), 0.0));
  if (needs_recording({&a})) {
    DataPtr ad = a.impl(), yd = y.impl();
    record("sum", {ad}, y, [ad, yd] {
      const double g = yd->grad[0];
      for (auto& v : ad->grad) v += g;
    });
  }
  return y;
}

Tensor mean(const Tensor& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  std::size_t batch = 1, m = 0, k = 0, n = 0;
  bool shared_rhs = true;
  if (a.rank() == 2 && b.rank() == 2) {
    m = a.dim(0);
    k = a.dim(1);
    if (b.dim(0) != k) shape_fail("matmul", a.shape(), b.shape());
    n = b.dim(1);
  } else if (a.rank() == 3 && b.rank() == 2) {
    batch = a.dim(0);
    m = a.dim(1);
    k = a.dim(2);
    if (b.dim(0) != k) shape_fail("matmul", a.shape(), b.shape());
    n = b.dim(1);
  } else if (a.rank() == 3 && b.rank() == 3) {
    batch = a.dim(0);
    m = a.dim(1);
    k = a.dim(2);
    if (b.dim(0) != batch || b.dim(1) != k) {
      shape_fail("matmul", a.shape(), b.shape());
    }
    n = b.dim(2);
    shared_rhs = false;
  } else {
    shape_fail("matmul", a.shape(), b.shape());
  }

  std::vector<double> out(batch * m * n, 0.0);
  const double* ap = a.values().data();
  const double* bp = b.values().data();
  for (std::size_t s = 0; s < batch; ++s) {
    gemm_nn(ap + s * m * k, bp + (shared_rhs ? 0 : s * k * n),
            out.data() + s * m * n, m, k, n);
  }
  Shape shape = a.rank() == 2 ? Shape{m, n} : Shape{batch, m, n};
  Tensor y(std::move(shape), std::move(out));
  if (needs_recording({&a, &b})) {
    DataPtr ad = a.impl(), bd = b.impl(), yd = y.impl();
    record("matmul", {ad, bd}, y, [=] {
      for (std::size_t s = 0; s < batch; ++s) {
        const double* g = yd->grad.data() + s * m * n;
        const std::size_t boff = shared_rhs ? 0 : s * k * n;
        if (ad->requires_grad) {
          gemm_nt(g, bd->value.data() + boff, ad->grad.data() + s * m * k, m,
                  n, k);
        }
        if (bd->requires_grad) {
          gemm_tn(ad->value.data() + s * m * k, g, bd->grad.data() + boff, m,
                  k, n);
        }
      }
    });
  }
  return y;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor* bias) {
  const std::size_t in = last_dim(x, "linear");
  if (w.rank() != 2 || w.dim(0) != in) shape_fail("linear", x.shape(), w.shape());
  const std::size_t out_dim = w.dim(1);
  if (bias != nullptr && (bias->rank() != 1 || bias->dim(0) != out_dim)) {
    shape_fail("linear", w.shape(), bias->shape());
  }
  const std::size_t rows = x.numel() / in;
  std::vector<double> out(rows * out_dim, 0.0);
  if (bias != nullptr) {
    const auto bv = bias->values();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(bv.begin(), bv.end(), out.begin() + r * out_dim);
    }
  }
  gemm_nn(x.values().data(), w.values().data(), out.data(), rows, in, out_dim);
  Shape shape = x.shape();
  shape.back() = out_dim;
  Tensor y(std::move(shape), std::move(out));

  const bool rec = bias != nullptr ? needs_recording({&x, &w, bias})
                                   : needs_recording({&x, &w});
  if (rec) {
    DataPtr xd = x.impl(), wd = w.impl(), yd = y.impl();
    DataPtr bd = bias != nullptr ? bias->impl() : nullptr;
    std::vector<DataPtr> inputs{xd, wd};
    if (bd) inputs.push_back(bd);
    record("linear", std::move(inputs), y, [=] {
      const double* g = yd->grad.data();
      if (xd->requires_grad) {
        gemm_nt(g, wd->value.data(), xd->grad.data(), rows, out_dim, in);
      }
      if (wd->requires_grad) {
        gemm_tn(xd->value.data(), g, wd->grad.data(), rows, in, out_dim);
      }
      if (bd && bd->requires_grad) {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < out_dim; ++j) {
            bd->grad[j] += g[r * out_dim + j];
          }
        }
      }
    });
  }
  return y;
}

Tensor softmax_lastdim(const Tensor& x) {
  const std::size_t n = last_dim(x, "softmax_lastdim");
  const std::size_t rows = x.numel() / n;
  const auto xv = x.values();
  std::vector<double> out(x.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.data() + r * n;
    double* yr = out.data() + r * n;
    const double mx = *std::max_element(xr, xr + n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      z += yr[j];
    }
    for (std::size_t j = 0; j < n; ++j) yr[j] /= z;
  }
  Tensor y(x.shape(), std::move(out));
  if (needs_recording({&x})) {
    DataPtr xd = x.impl(), yd = y.impl();
    record("softmax", {xd}, y, [=] {
      for (std::size_t r = 0; r < rows; ++r) {
        const double* yr = yd->value.data() + r * n;
        const double* gr = yd->grad.data() + r * n;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += yr[j] * gr[j];
        double* dx = xd->grad.data() + r * n;
        for (std::size_t j = 0; j < n; ++j) dx[j] += yr[j] * (gr[j] - dot);
      }
    });
  }
  return y;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
  const std::size_t n = last_dim(x, "layer_norm");
  if (gain.rank() != 1 || gain.dim(0) != n) {
    shape_fail("layer_norm", x.shape(), gain.shape());
  }
  if (bias.rank() != 1 || bias.dim(0) != n) {
    shape_fail("layer_norm", x.shape(), bias.shape());
  }
  const std::size_t rows = x.numel() / n;
  const auto xv = x.values();
  const auto gv = gain.values();
  const auto bv = bias.values();
  auto xhat = std::make_shared<std::vector<double>>(x.numel());
  auto rstd = std::make_shared<std::vector<double>>(rows);
  std::vector<double> out(x.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.data() + r * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += xr[j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<double>(n);
    const double rs = 1.0 / std::sqrt(var + eps);
    (*rstd)[r] = rs;
    for (std::size_t j = 0; j < n; ++j) {
      const double h = (xr[j] - mu) * rs;
      (*xhat)[r * n + j] = h;
      out[r * n + j] = h * gv[j] + bv[j];
    }
  }
  Tensor y(x.shape(), std::move(out));
  if (needs_recording({&x, &gain, &bias})) {
    DataPtr xd = x.impl(), gd = gain.impl(), bd = bias.impl(), yd = y.impl();
    record("layer_norm", {xd, gd, bd}, y, [=] {
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t r = 0; r < rows; ++r) {
        const double* gr = yd->grad.data() + r * n;
        const double* hr = xhat->data() + r * n;
        if (gd->requires_grad || bd->requires_grad) {
          for (std::size_t j = 0; j < n; ++j) {
            if (gd->requires_grad) gd->grad[j] += gr[j] * hr[j];
            if (bd->requires_grad) bd->grad[j] += gr[j];
          }
        }
        if (xd->requires_grad) {
          double mean_dh = 0.0, mean_dh_h = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            const double dh = gr[j] * gd->value[j];
            mean_dh += dh;
            mean_dh_h += dh * hr[j];
          }
          mean_dh *= inv_n;
          mean_dh_h *= inv_n;
          double* dx = xd->grad.data() + r * n;
          for (std::size_t j = 0; j < n; ++j) {
            const double dh = gr[j] * gd->value[j];
            dx[j] += (*rstd)[r] * (dh - mean_dh - hr[j] * mean_dh_h);
          }
        }
      }
    });
  }
  return y;
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            std::vector<double>* probs) {
  if (q.rank() != 3 || k.rank() != 3 || v.rank() != 3) {
    shape_fail("scaled_dot_attention", q.shape(), k.shape());
  }
  const std::size_t batch = q.dim(0), n = q.dim(1), dh = q.dim(2);
  const std::size_t m = k.dim(1);
  if (k.dim(0) != batch || k.dim(2) != dh) {
    shape_fail("scaled_dot_attention", q.shape(), k.shape());
  }
  if (v.dim(0) != batch || v.dim(1) != m) {
    shape_fail("scaled_dot_attention", k.shape(), v.shape());
  }
  const std::size_t dv = v.dim(2);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  auto p = std::make_shared<std::vector<double>>(batch * n * m, 0.0);
  std::vector<double> out(batch * n * dv, 0.0);
  for (std::size_t s = 0; s < batch; ++s) {
    const double* qs = q.values().data() + s * n * dh;
    const double* ks = k.values().data() + s * m * dh;
    const double* vs = v.values().data() + s * m * dv;
    double* ps = p->data() + s * n * m;
    gemm_nt(qs, ks, ps, n, dh, m);
    for (std::size_t i = 0; i < n; ++i) {
      double* row = ps + i * m;
      double mx = -INFINITY;
      for (std::size_t j = 0; j < m; ++j) {
        row[j] *= inv_sqrt;
        mx = std::max(mx, row[j]);
      }
      double z = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        row[j] = std::exp(row[j] - mx);
        z += row[j];
      }
      for (std::size_t j = 0; j < m; ++j) row[j] /= z;
    }
    gemm_nn(ps, vs, out.data() + s * n * dv, n, m, dv);
  }
  if (probs != nullptr) *probs = *p;

  Tensor y({batch, n, dv}, std::move(out));
  if (needs_recording({&q, &k, &v})) {
    DataPtr qd = q.impl(), kd = k.impl(), vd = v.impl(), yd = y.impl();
    record("attention", {qd, kd, vd}, y, [=] {
      std::vector<double> dp(n * m);
      for (std::size_t s = 0; s < batch; ++s) {
        const double* g = yd->grad.data() + s * n * dv;
        const double* ps = p->data() + s * n * m;
        const double* vs = vd->value.data() + s * m * dv;
        if (vd->requires_grad) {
          gemm_tn(ps, g, vd->grad.data() + s * m * dv, n, m, dv);
        }
        if (!qd->requires_grad && !kd->requires_grad) continue;
        std::fill(dp.begin(), dp.end(), 0.0);
        gemm_nt(g, vs, dp.data(), n, dv, m);
        // dp <- dS, the gradient w.r.t. the scaled scores
        for (std::size_t i = 0; i < n; ++i) {
          const double* pr = ps + i * m;
          double* dr = dp.data() + i * m;
          double dot = 0.0;
          for (std::size_t j = 0; j < m; ++j) dot += pr[j] * dr[j];
          for (std::size_t j = 0; j < m; ++j) {
            dr[j] = pr[j] * (dr[j] - dot) * inv_sqrt;
          }
        }
        if (qd->requires_grad) {
          gemm_nn(dp.data(), kd->value.data() + s * m * dh,
                  qd->grad.data() + s * n * dh, n, m, dh);
        }
        if (kd->requires_grad) {
          gemm_tn(dp.data(), qd->value.data() + s * n * dh,
                  kd->grad.data() + s * m * dh, n, m, dh);
        }
      }
    });
  }
  return y;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    shape_fail("reshape", x.shape(), shape);
  }
  Tensor y(std::move(shape),
           std::vector<double>(x.values().begin(), x.values().end()));
  if (needs_recording({&x})) {
    DataPtr xd = x.impl(), yd = y.impl();
    record("reshape", {xd}, y, [xd, yd] {
      for (std::size_t i = 0; i < yd->grad.size(); ++i) {
        xd->grad[i] += yd->grad[i];
      }
    });
  }
  return y;
}

Tensor permute(const Tensor& x, std::span<const std::size_t> axes) {
  const std::size_t r = x.rank();
  if (axes.size() != r) {
    shape_fail("permute", x.shape(), "does not match axis count");
  }
  std::vector<bool> seen(r, false);
  for (auto a : axes) {
    if (a >= r || seen[a]) shape_fail("permute", x.shape(), "bad axis order");
    seen[a] = true;
  }
  Shape out_shape(r);
  std::vector<std::size_t> in_stride(r, 1);
  for (std::size_t i = r; i-- > 1;) {
    in_stride[i - 1] = in_stride[i] * x.shape()[i];
  }
  for (std::size_t i = 0; i < r; ++i) out_shape[i] = x.shape()[axes[i]];

  auto index = std::make_shared<std::vector<std::size_t>>(x.numel());
  std::vector<std::size_t> counter(r, 0);
  for (std::size_t flat = 0; flat < x.numel(); ++flat) {
    std::size_t src = 0;
    for (std::size_t i = 0; i < r; ++i) src += counter[i] * in_stride[axes[i]];
    (*index)[flat] = src;
    for (std::size_t i = r; i-- > 0;) {
      if (++counter[i] < out_shape[i]) break;
      counter[i] = 0;
    }
  }
  std::vector<double> out(x.numel());
  const auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[(*index)[i]];
  Tensor y(std::move(out_shape), std::move(out));
  if (needs_recording({&x})) {
    DataPtr xd = x.impl(), yd = y.impl();
    record("permute", {xd}, y, [xd, yd, index] {
      for (std::size_t i = 0; i < yd->grad.size(); ++i) {
        xd->grad[(*index)[i]] += yd->grad[i];
      }
    });
  }
  return y;
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start,
             std::size_t length) {
  if (axis >= x.rank() || length == 0 || start + length > x.dim(axis)) {
    shape_fail("slice", x.shape(),
               "cannot take [" + std::to_string(start) + ", " +
                   std::to_string(start + length) + ") on axis " +
                   std::to_string(axis));
  }
  const auto& s = x.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t span_in = s[axis] * inner;
  const std::size_t span_out = length * inner;
  std::vector<double> out(outer * span_out);
  const auto xv = x.values();
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(xv.begin() + o * span_in + start * inner, span_out,
                out.begin() + o * span_out);
  }
  Shape shape = s;
  shape[axis] = length;
  Tensor y(std::move(shape), std::move(out));
  if (needs_recording({&x})) {
    DataPtr xd = x.impl(), yd = y.impl();
    record("slice", {xd}, y, [=] {
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < span_out; ++i) {
          xd->grad[o * span_in + start * inner + i] +=
              yd->grad[o * span_out + i];
        }
      }
    });
  }
  return y;
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const auto& s0 = parts[0].shape();
  if (axis >= s0.size()) shape_fail("concat", s0, "has no such axis");
  std::size_t total = 0;
  for (const auto& p : parts) {
    const auto& s = p.shape();
    bool ok = s.size() == s0.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) {
      ok = i == axis || s[i] == s0[i];
    }
    if (!ok) shape_fail("concat", s0, s);
    total += s[axis];
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s0[i];
  for (std::size_t i = axis + 1; i < s0.size(); ++i) inner *= s0[i];

  Shape shape = s0;
  shape[axis] = total;
  std::vector<double> out(outer * total * inner);
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const std::size_t w = p.dim(axis) * inner;
    const auto pv = p.values();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(pv.begin() + o * w, w,
                  out.begin() + o * total * inner + offset * inner);
    }
    offset += p.dim(axis);
  }
  Tensor y(std::move(shape), std::move(out));

  bool any = false;
  for (const auto& p : parts) any = any || needs_recording({&p});
  if (any) {
    std::vector<DataPtr> inputs;
    for (const auto& p : parts) inputs.push_back(p.impl());
    DataPtr yd = y.impl();
    record("concat", inputs, y, [=] {
      for (std::size_t idx = 0; idx < inputs.size(); ++idx) {
        const auto& in = inputs[idx];
        if (!in->requires_grad) continue;
        const std::size_t w = in->shape[axis] * inner;
        for (std::size_t o = 0; o < outer; ++o) {
          const double* g =
              yd->grad.data() + o * total * inner + offsets[idx] * inner;
          double* dst = in->grad.data() + o * w;
          for (std::size_t i = 0; i < w; ++i) dst[i] += g[i];
        }
      }
    });
  }
  return y;
}

Tensor repeat(const Tensor& x, std::size_t n) {
  if (n == 0) shape_fail("repeat", x.shape(), "cannot repeat zero times");
  Shape shape{n};
  shape.insert(shape.end(), x.shape().begin(), x.shape().end());
  std::vector<double> out;
  out.reserve(n * x.numel());
  for (std::size_t i = 0; i < n; ++i) {
    out.insert(out.end(), x.values().begin(), x.values().end());
  }
  Tensor y(std::move(shape), std::move(out));
  if (needs_recording({&x})) {
    DataPtr xd = x.impl(), yd = y.impl();
    record("repeat", {xd}, y, [xd, yd, n] {
      const std::size_t m = xd->value.size();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) xd->grad[j] += yd->grad[i * m + j];
      }
    });
  }
  return y;
}

}  // namespace vot::numerics
