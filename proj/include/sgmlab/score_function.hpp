#pragma once

#include "sgmlab/conformation.hpp"

namespace sgmlab {

// Anything that can play s(C, sigma): the learned model or an analytic
// oracle. Samplers and the bias estimator only see this interface.
class ScoreFunction {
 public:
  virtual ~ScoreFunction() = default;

  virtual int n_atoms() const = 0;

  // True when the score is translation invariant with zero mean per axis;
  // samplers then keep their state in the centroid-free subspace.
  virtual bool com_free() const = 0;

  virtual Conformation score(const Conformation& c, double sigma) const = 0;
};

// The zero field. Turns both samplers into pure diffusion / identity maps.
class ZeroScore final : public ScoreFunction {
 public:
  explicit ZeroScore(int n_atoms, bool com_free = true) : n_atoms_(n_atoms), com_free_(com_free) {}
  int n_atoms() const override { return n_atoms_; }
  bool com_free() const override { return com_free_; }
  Conformation score(const Conformation& c, double) const override {
    return Conformation::Zero(c.rows(), 3);
  }

 private:
  int n_atoms_;
  bool com_free_;
};

// Adds a constant vector to every entry of another score field.
class OffsetScore final : public ScoreFunction {
 public:
  OffsetScore(const ScoreFunction& inner, double offset) : inner_(inner), offset_(offset) {}
  int n_atoms() const override { return inner_.n_atoms(); }
  bool com_free() const override { return false; }
  Conformation score(const Conformation& c, double sigma) const override {
    Conformation s = inner_.score(c, sigma);
    s.array() += offset_;
    return s;
  }

 private:
  const ScoreFunction& inner_;
  double offset_;
};

}  // namespace sgmlab
