#include "travkit/errors.hpp"

namespace travkit {

void throw_shape_mismatch(const std::string& what, int w1, int h1, int w2, int h2) {
  throw ShapeError(what + ": " + std::to_string(w1) + "x" + std::to_string(h1) + " vs " +
                   std::to_string(w2) + "x" + std::to_string(h2));
}

}  // namespace travkit
