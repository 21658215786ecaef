#pragma once

#include <cmath>
#include <vector>

#include "ratelab/density.hpp"

namespace ratelab {

// Discrepancies between two densities on a common sample space.
//
//   hellinger_sq(p,q) = int (sqrt p - sqrt q)^2        in [0,2]
//   kl(p,q)           = int p log(p/q)                 in [0,+inf]
//   v_k(p,q,k)        = int p |log(p/q)|^k
//   v_k0(p,q,k)       = int p |log(p/q) - kl(p,q)|^k   (centered moment)
//
// An unbounded likelihood-ratio moment is reported as +infinity, never as an
// exception; kl_is_infinite() names the check.

double hellinger_sq(const Density& p, const Density& q);
double kl(const Density& p, const Density& q);
double v_k(const Density& p, const Density& q, int k);
double v_k0(const Density& p, const Density& q, int k);

inline bool kl_is_infinite(double value) { return std::isinf(value); }

// One component of a product experiment: the pair of true and candidate
// densities observed at that index.
struct ComponentPair {
  Density p, q;
};

// Root average squared Hellinger distance across independent components.
double avg_hellinger_dn(const std::vector<ComponentPair>& pairs);

// Average-KL neighborhood membership: mean(K_i) <= eps^2 and
// mean(V_i) <= eps^2 over the components.
bool neighborhood_check(const std::vector<double>& per_component_K,
                        const std::vector<double>& per_component_V, double eps);

}  // namespace ratelab
