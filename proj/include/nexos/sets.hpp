#pragma once

#include "nexos/core.hpp"

#include <functional>
#include <vector>

namespace nexos {

/// {x : card(x) <= k, ||x||_inf <= bound}.
class SparseBoxSet final : public ProjectableSet {
 public:
  SparseBoxSet(Eigen::Index dimension, Eigen::Index k, double bound);

  Family family() const override { return Family::SR; }
  Eigen::Index dimension() const override { return n_; }
  Vector project(const Vector& x) const override;
  bool contains(const Vector& x, double tol = 1e-10) const override;

  Eigen::Index k() const { return k_; }
  double bound() const { return bound_; }

 private:
  Eigen::Index n_;
  Eigen::Index k_;
  double bound_;
};

/// {X in R^{rows x cols} : rank(X) <= r, ||X||_2 <= bound}, X stored column-major.
class RankSpectralSet final : public ProjectableSet {
 public:
  RankSpectralSet(Shape shape, Eigen::Index r, double bound, Family family = Family::RM);

  Family family() const override { return family_; }
  Eigen::Index dimension() const override { return shape_.size(); }
  Vector project(const Vector& x) const override;
  bool contains(const Vector& x, double tol = 1e-10) const override;

  Shape shape() const { return shape_; }
  Eigen::Index rank() const { return r_; }
  double bound() const { return bound_; }

 private:
  Shape shape_;
  Eigen::Index r_;
  double bound_;
  Family family_;
};

/// {(X, d) : X symmetric, rank(X) <= r, ||X||_2 <= bound, d >= 0}.
/// Flat layout: vec(X) (p * p entries) followed by d (p entries).
class FactorAnalysisSet final : public ProjectableSet {
 public:
  FactorAnalysisSet(Eigen::Index p, Eigen::Index r, double bound);

  Family family() const override { return Family::FA; }
  Eigen::Index dimension() const override { return p_ * p_ + p_; }
  Vector project(const Vector& x) const override;
  bool contains(const Vector& x, double tol = 1e-10) const override;

  Eigen::Index order() const { return p_; }

 private:
  Eigen::Index p_;
  Eigen::Index r_;
  double bound_;
};

/// Split / join the factor-analysis flat layout.
Matrix fa_matrix_block(const Vector& x, Eigen::Index p);
Vector fa_diagonal_block(const Vector& x, Eigen::Index p);
Vector fa_join(const Matrix& X, const Vector& d);

/// The whole ambient space; projection is the identity.
class EuclideanSpace final : public ProjectableSet {
 public:
  explicit EuclideanSpace(Eigen::Index dimension) : n_(dimension) {}

  Family family() const override { return Family::Custom; }
  Eigen::Index dimension() const override { return n_; }
  Vector project(const Vector& x) const override { return x; }
  bool contains(const Vector&, double = 1e-10) const override { return true; }
  double distance(const Vector&) const override { return 0.0; }

 private:
  Eigen::Index n_;
};

/// A finite set of points. Equidistant nearest points resolve to the
/// lexicographically smallest candidate.
class FinitePointSet final : public ProjectableSet {
 public:
  explicit FinitePointSet(std::vector<Vector> points);

  Family family() const override { return Family::Custom; }
  Eigen::Index dimension() const override { return points_.front().size(); }
  Vector project(const Vector& x) const override;
  bool contains(const Vector& x, double tol = 1e-10) const override;

 private:
  std::vector<Vector> points_;
};

/// User-supplied projection and membership test.
class CallableSet final : public ProjectableSet {
 public:
  using Projection = std::function<Vector(const Vector&)>;
  using Membership = std::function<bool(const Vector&, double)>;

  CallableSet(Eigen::Index dimension, Projection project, Membership contains);

  Family family() const override { return Family::Custom; }
  Eigen::Index dimension() const override { return n_; }
  Vector project(const Vector& x) const override;
  bool contains(const Vector& x, double tol = 1e-10) const override;

 private:
  Eigen::Index n_;
  Projection project_;
  Membership contains_;
};

}  // namespace nexos
