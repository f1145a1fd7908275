#include "carnot/groups.hpp"

#include <cctype>

#include "carnot/error.hpp"

namespace carnot {

StratifiedAlgebra heisenberg(std::size_t n) {
  if (n == 0) throw PreconditionError("heisenberg(n) needs n >= 1");
  std::vector<BracketRule> rules;
  for (std::size_t i = 0; i < n; ++i) rules.push_back({i, n + i, 2 * n, Rational(1)});
  return StratifiedAlgebra({2 * n, 1}, rules, n == 1 ? "heisenberg" : "heisenberg" + std::to_string(n));
}

StratifiedAlgebra engel4() {
  return StratifiedAlgebra({2, 1, 1}, {{0, 1, 2, Rational(1)}, {0, 2, 3, Rational(1)}}, "engel4");
}

StratifiedAlgebra e5() {
  return StratifiedAlgebra({2, 1, 1, 1}, {{0, 1, 2, Rational(1)}, {0, 2, 3, Rational(1)}, {0, 3, 4, Rational(1)}},
                           "e5");
}

StratifiedAlgebra abelian(std::size_t n) {
  if (n == 0) throw PreconditionError("abelian(n) needs n >= 1");
  return StratifiedAlgebra({n}, {}, "abelian" + std::to_string(n));
}

StratifiedAlgebra builtin_algebra(const std::string& name) {
  auto suffix = [&](const std::string& prefix) -> std::size_t {
    const std::string rest = name.substr(prefix.size());
    if (rest.empty()) return 1;
    for (char c : rest)
      if (!std::isdigit(static_cast<unsigned char>(c))) throw PreconditionError("unknown group '" + name + "'");
    return std::stoul(rest);
  };
  if (name == "engel4") return engel4();
  if (name == "e5") return e5();
  if (name.rfind("heisenberg", 0) == 0) return heisenberg(suffix("heisenberg"));
  if (name.rfind("abelian", 0) == 0) return abelian(suffix("abelian"));
  throw PreconditionError("unknown group '" + name + "'");
}

}  // namespace carnot
