#pragma once

#include <vector>

#include "tma/grid.hpp"

namespace tma {

struct ConjugateResult {
  GridFunction dual;
  std::vector<std::size_t> argmax;  // primal node index per dual node
};

enum class ConjugateMethod { separable, brute_force };

// u*(y) = max over primal nodes x of <y, x> - u(x), on the lattice nodes of
// dual_domain with pitch h_dual. The maximiser is decided exactly; ties go
// to the smallest node index.
ConjugateResult legendre_transform(const GridFunction& u, const Domain2D& dual_domain,
                                   double h_dual,
                                   ConjugateMethod method = ConjugateMethod::separable);

// Square of half-width max finite-difference slope of u plus h_dual.
Domain2D default_dual_domain(const GridFunction& u, double h_dual);

// (u*)* on the primal nodes, with u* taken on the default dual domain. The
// outer maximum is decided exactly: nodes on the envelope keep their value
// bit for bit and the others get the envelope rounded up, which makes the
// operation idempotent. Cost is O(primal x dual nodes).
GridFunction biconjugate(const GridFunction& u, double h_dual,
                         ConjugateMethod method = ConjugateMethod::separable);

// The value <y, x> - u in the form used by every conjugate path.
inline double conjugate_candidate(Vec2 y, Vec2 x, double u) {
  return (y.x * x.x + y.y * x.y) - u;
}

}  // namespace tma
