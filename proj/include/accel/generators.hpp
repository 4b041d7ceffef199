#pragma once

#include <cstdint>

#include "accel/problem.hpp"

namespace accel {

// Benchmark instance: f(x) = log Σ_k exp(⟨A_k, x⟩) over m sparse rows,
// g(x) = ½ xᵀG²x with G² = Σ λ_i ẽ_i ẽ_iᵀ, λ on the simplex, ẽ entries in [1,2).
struct ExperimentSpec {
  int n = 50;
  int m = 2000;
  double density = 0.01;
  std::uint64_t seed = 1;
  std::string lambda_mix = "uniform-simplex";
};

CompositeProblem gen_logsumexp_quadratic(const ExperimentSpec& spec);

// ½ xᵀQx + bᵀx with spectrum log-spaced on [mu, L]; minimizer and optimum known.
CompositeProblem gen_quadratic(int d, double mu, double L, std::uint64_t seed);

// f(x) = ¼ Σ x_i⁴, g ≡ 0; minimizer 0, optimum 0.
CompositeProblem gen_quartic(int d);

// f(x) = ½‖Ax − b‖², g(x) = reg·‖x‖₁ with prox but no gradient oracle.
CompositeProblem gen_lasso(int d, int m, double reg, std::uint64_t seed);

// Rebuild a problem from its serialized meta block (same assembly path the
// generators use, so loaded and generated instances are bit-identical).
CompositeProblem problem_from_meta(const json& meta);

}  // namespace accel
