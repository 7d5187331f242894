#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace hpn {

// Dense column vector, 64-bit floats throughout.
struct Vector {
  std::vector<double> data;

  Vector() = default;
  explicit Vector(int n, double fill = 0.0) : data(static_cast<size_t>(n), fill) {}
  Vector(std::initializer_list<double> xs) : data(xs) {}

  int dim() const { return static_cast<int>(data.size()); }
  double& operator[](int i) { return data[static_cast<size_t>(i)]; }
  double operator[](int i) const { return data[static_cast<size_t>(i)]; }

  std::span<double> flat() { return data; }
  std::span<const double> flat() const { return data; }

  double norm() const;
  double dot(const Vector& o) const;
};

// Dense row-major matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // rows*cols, row-major

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  std::span<double> flat() { return data; }
  std::span<const double> flat() const { return data; }

  static Matrix identity(int n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rs);
};

// Seeded, platform-stable generator. mt19937_64 is fully specified by the
// standard; the distribution draws below are hand-rolled because the
// std::*_distribution classes are not bit-stable across implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64() { return eng_(); }
  double uniform01();          // [0,1), 53-bit resolution
  int uniform_int(int n);      // uniform on [0,n), n >= 1
  double normal();             // standard normal, Box-Muller
  Rng fork(std::uint64_t stream) const;  // independent derived stream

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

Vector matvec(const Matrix& m, const Vector& v);   // m · v
Vector mat_tvec(const Matrix& m, const Vector& v); // mᵀ · v

// Frobenius inner product <a,b>_F.
double frobenius_dot(const Matrix& a, const Matrix& b);

// Cosine similarity in [-1,1]. Either norm below 1e-12 → 0 by convention
// (all-zero feature rows must not poison the pipeline with NaNs).
double cosine(const Vector& a, const Vector& b);

// Cosine plus analytic gradients wrt both arguments. Degenerate norms give
// value 0 and zero gradients.
double cosine_with_grads(const Vector& a, const Vector& b, Vector& grad_a, Vector& grad_b);

struct XentResult {
  double loss;
  Vector grad;  // softmax(logits) - onehot(label)
};

// Cross entropy of softmax(logits) against a class index, max-subtraction
// stabilized. Label out of range is a hard error.
XentResult softmax_xent(const Vector& logits, int label);

// Plain SGD: param <- param - lr*grad. No momentum, no weight decay.
void sgd_step(std::span<double> param, std::span<const double> grad, double lr);
void sgd_step(Matrix& param, const Matrix& grad, double lr);
void sgd_step(Vector& param, const Vector& grad, double lr);

// Smallest eigenvalue of a symmetric matrix via cyclic Jacobi rotations,
// iterated until the off-diagonal norm is negligible. Input must be square
// and symmetric within 1e-10.
double sym_eig_min(const Matrix& s);

// All eigenvalues, ascending. Same preconditions as sym_eig_min.
std::vector<double> sym_eig_all(const Matrix& s);

// Central-difference gradient check on one parameter block. Perturbs theta
// in place entry by entry, calls loss(), restores, and compares against the
// analytic gradient. Returns the max relative error with denominator
// max(1e-8, |analytic|+|numeric|). eps must lie in [1e-7, 1e-3].
double finite_diff_check(std::span<double> theta, std::span<const double> analytic,
                         const std::function<double()>& loss, double eps);

bool all_finite(std::span<const double> xs);

// Gaussian-filled matrix, entries N(0, stddev²).
Matrix gaussian_matrix(int rows, int cols, double stddev, Rng& rng);

}  // namespace hpn
