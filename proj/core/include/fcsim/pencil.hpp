#pragma once

// Nilpotency index of the linear pencil E x' + A x = f.

#include "fcsim/element.hpp"
#include "fcsim/linalg.hpp"

#include <stdexcept>
#include <utility>

namespace fcsim {

class SingularPencilError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index of the regular pencil (E, A): 0 for an ODE, otherwise the size of
/// the largest nilpotent Jordan block in the Weierstrass form. Computed on
/// E^ = (l0 E + A)^{-1} E for a well-conditioned shift l0 by growing
/// N_{k+1} = ker((I - Pi_{N_k}) E^) until the dimension stalls.
/// Throws SingularPencilError when det(l E + A) vanishes identically.
int pencil_index(const Mat& e, const Mat& a);

enum class Excitation { Voltage, Current };

/// Linearized pencil of an element driven on its own. With a voltage
/// excitation the unknowns are (x, i); with a current excitation they are
/// (x, v).
std::pair<Mat, Mat> element_pencil(const GeneralizedElement& el, Excitation ex, const ElementPoint& at);

}  // namespace fcsim
