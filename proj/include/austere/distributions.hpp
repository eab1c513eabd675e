#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "austere/rng.hpp"
#include "austere/value.hpp"

namespace austere {

enum class Family { Bernoulli, Normal, Gamma, Beta, InverseGamma, Uniform, MultivariateNormal };

struct PrimitiveDistribution {
    std::string_view name;
    Family family;
    std::size_t arity;
};

const PrimitiveDistribution* find_distribution(std::string_view name);

// Log density of x under the family with the given parameter values.
// Returns -inf outside the support; throws DomainError on invalid parameters.
double log_pdf(Family family, std::span<const Value> params, const Value& x);
Value sample(Family family, std::span<const Value> params, Rng& rng);

// Finite support test used before evaluating densities of proposed values.
bool in_support(Family family, const Value& x);

// Upper tail P(T > t) of Student's t with the given degrees of freedom.
double student_t_tail(double t, double dof);

// 1 / (1 + exp(-w.x)), computed without overflow.
double linear_logistic(std::span<const double> w, std::span<const double> x);

}  // namespace austere
