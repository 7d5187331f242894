#include "hpn/numerics.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

namespace hpn {

double Vector::norm() const {
  double s = 0.0;
  for (double x : data) s += x * x;
  return std::sqrt(s);
}

double Vector::dot(const Vector& o) const {
  if (data.size() != o.data.size()) throw std::invalid_argument("Vector::dot: dimension mismatch");
  double s = 0.0;
  for (size_t i = 0; i < data.size(); ++i) s += data[i] * o.data[i];
  return s;
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rs) {
  Matrix m(static_cast<int>(rs.size()), rs.size() ? static_cast<int>(rs.begin()->size()) : 0);
  int r = 0;
  for (const auto& row : rs) {
    if (static_cast<int>(row.size()) != m.cols)
      throw std::invalid_argument("Matrix::from_rows: ragged rows");
    int c = 0;
    for (double x : row) m.at(r, c++) = x;
    ++r;
  }
  return m;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), eng_(splitmix64(seed)) {}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int Rng::uniform_int(int n) {
  if (n < 1) throw std::invalid_argument("Rng::uniform_int: n must be >= 1");
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return static_cast<int>(x % un);
}

double Rng::normal() {
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log1p(-u1));
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::fork(std::uint64_t stream) const {
  return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x51ED2700F77C63B1ull)));
}

Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols != v.dim()) throw std::invalid_argument("matvec: dimension mismatch");
  Vector out(m.rows);
  for (int r = 0; r < m.rows; ++r) {
    double s = 0.0;
    const double* row = m.data.data() + static_cast<size_t>(r) * m.cols;
    for (int c = 0; c < m.cols; ++c) s += row[c] * v[c];
    out[r] = s;
  }
  return out;
}

Vector mat_tvec(const Matrix& m, const Vector& v) {
  if (m.rows != v.dim()) throw std::invalid_argument("mat_tvec: dimension mismatch");
  Vector out(m.cols);
  for (int r = 0; r < m.rows; ++r) {
    const double* row = m.data.data() + static_cast<size_t>(r) * m.cols;
    const double vr = v[r];
    for (int c = 0; c < m.cols; ++c) out[c] += row[c] * vr;
  }
  return out;
}

double frobenius_dot(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument("frobenius_dot: shape mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

constexpr double kDegenerateNorm = 1e-12;

double cosine(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("cosine: dimension mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na < kDegenerateNorm || nb < kDegenerateNorm) return 0.0;
  return a.dot(b) / (na * nb);
}

double cosine_with_grads(const Vector& a, const Vector& b, Vector& grad_a, Vector& grad_b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("cosine_with_grads: dimension mismatch");
  grad_a = Vector(a.dim());
  grad_b = Vector(b.dim());
  const double na = a.norm();
  const double nb = b.norm();
  if (na < kDegenerateNorm || nb < kDegenerateNorm) return 0.0;
  const double inv = 1.0 / (na * nb);
  const double c = a.dot(b) * inv;
  for (int i = 0; i < a.dim(); ++i) {
    grad_a[i] = b[i] * inv - c * a[i] / (na * na);
    grad_b[i] = a[i] * inv - c * b[i] / (nb * nb);
  }
  return c;
}

XentResult softmax_xent(const Vector& logits, int label) {
  if (label < 0 || label >= logits.dim())
    throw std::out_of_range("softmax_xent: label out of range");
  double mx = logits[0];
  for (int i = 1; i < logits.dim(); ++i) mx = std::max(mx, logits[i]);
  double z = 0.0;
  Vector p(logits.dim());
  for (int i = 0; i < logits.dim(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (int i = 0; i < logits.dim(); ++i) p[i] /= z;
  const double loss = std::log(z) - (logits[label] - mx);
  p[label] -= 1.0;
  return {loss, std::move(p)};
}

void sgd_step(std::span<double> param, std::span<const double> grad, double lr) {
  if (param.size() != grad.size()) throw std::invalid_argument("sgd_step: shape mismatch");
  if (!(lr > 0.0)) throw std::invalid_argument("sgd_step: lr must be positive");
  for (size_t i = 0; i < param.size(); ++i) param[i] -= lr * grad[i];
}

void sgd_step(Matrix& param, const Matrix& grad, double lr) {
  if (param.rows != grad.rows || param.cols != grad.cols)
    throw std::invalid_argument("sgd_step: shape mismatch");
  sgd_step(param.flat(), grad.flat(), lr);
}

void sgd_step(Vector& param, const Vector& grad, double lr) {
  if (param.dim() != grad.dim()) throw std::invalid_argument("sgd_step: shape mismatch");
  sgd_step(param.flat(), grad.flat(), lr);
}

namespace {

// One cyclic sweep of Jacobi rotations over the upper triangle.
void jacobi_sweep(Matrix& a) {
  const int n = a.rows;
  for (int p = 0; p < n - 1; ++p) {
    for (int q = p + 1; q < n; ++q) {
      const double apq = a.at(p, q);
      if (apq == 0.0) continue;
      const double app = a.at(p, p);
      const double aqq = a.at(q, q);
      const double theta = 0.5 * (aqq - app) / apq;
      double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
      if (theta < 0.0) t = -t;
      const double c = 1.0 / std::sqrt(1.0 + t * t);
      const double s = t * c;
      for (int k = 0; k < n; ++k) {
        const double akp = a.at(k, p);
        const double akq = a.at(k, q);
        a.at(k, p) = c * akp - s * akq;
        a.at(k, q) = s * akp + c * akq;
      }
      for (int k = 0; k < n; ++k) {
        const double apk = a.at(p, k);
        const double aqk = a.at(q, k);
        a.at(p, k) = c * apk - s * aqk;
        a.at(q, k) = s * apk + c * aqk;
      }
    }
  }
}

double offdiag_norm(const Matrix& a) {
  double s = 0.0;
  for (int r = 0; r < a.rows; ++r)
    for (int c = 0; c < a.cols; ++c)
      if (r != c) s += a.at(r, c) * a.at(r, c);
  return std::sqrt(s);
}

Matrix check_and_symmetrize(const Matrix& s) {
  if (s.rows != s.cols) throw std::invalid_argument("sym_eig: matrix must be square");
  for (int r = 0; r < s.rows; ++r)
    for (int c = r + 1; c < s.cols; ++c)
      if (std::abs(s.at(r, c) - s.at(c, r)) > 1e-10)
        throw std::invalid_argument("sym_eig: matrix not symmetric within 1e-10");
  Matrix a = s;
  for (int r = 0; r < s.rows; ++r)
    for (int c = 0; c < s.cols; ++c) a.at(r, c) = 0.5 * (s.at(r, c) + s.at(c, r));
  return a;
}

}  // namespace

std::vector<double> sym_eig_all(const Matrix& s) {
  Matrix a = check_and_symmetrize(s);
  const int n = a.rows;
  if (n == 0) return {};
  double scale = 0.0;
  for (double x : a.data) scale = std::max(scale, std::abs(x));
  const double tol = 1e-12 * std::max(1.0, scale);
  for (int sweep = 0; sweep < 100; ++sweep) {
    if (offdiag_norm(a) < tol) break;
    jacobi_sweep(a);
  }
  std::vector<double> eig(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) eig[static_cast<size_t>(i)] = a.at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double sym_eig_min(const Matrix& s) {
  auto eig = sym_eig_all(s);
  if (eig.empty()) throw std::invalid_argument("sym_eig_min: empty matrix");
  return eig.front();
}

double finite_diff_check(std::span<double> theta, std::span<const double> analytic,
                         const std::function<double()>& loss, double eps) {
  if (theta.size() != analytic.size())
    throw std::invalid_argument("finite_diff_check: gradient shape mismatch");
  if (eps < 1e-7 || eps > 1e-3)
    throw std::invalid_argument("finite_diff_check: eps outside [1e-7, 1e-3]");
  double worst = 0.0;
  for (size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + eps;
    const double fp = loss();
    theta[i] = saved - eps;
    const double fm = loss();
    theta[i] = saved;
    const double numeric = (fp - fm) / (2.0 * eps);
    const double denom = std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

bool all_finite(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

Matrix gaussian_matrix(int rows, int cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  for (double& x : m.data) x = stddev * rng.normal();
  return m;
}

}  // namespace hpn
