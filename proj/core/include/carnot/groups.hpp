#pragma once

#include "carnot/algebra.hpp"

namespace carnot {

/// Heisenberg algebra of dimension 2n+1: [X_i, X_{n+i}] = X_{2n+1}.
StratifiedAlgebra heisenberg(std::size_t n);
/// Engel algebra: [X1,X2]=X3, [X1,X3]=X4; layers 2+1+1.
StratifiedAlgebra engel4();
/// Filiform algebra [X1,X2]=X3, [X1,X3]=X4, [X1,X4]=X5; layers 2+1+1+1.
StratifiedAlgebra e5();
/// Abelian R^n as a step-1 algebra.
StratifiedAlgebra abelian(std::size_t n);

/// Built-in algebra by name: "heisenberg", "heisenberg<n>", "engel4", "e5", "abelian<n>".
StratifiedAlgebra builtin_algebra(const std::string& name);

}  // namespace carnot
