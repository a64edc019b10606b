#include "borealis/types.hpp"

#include <cmath>

namespace borealis {

double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace borealis
