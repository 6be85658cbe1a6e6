#include "deblur/image.hpp"

#include <stdexcept>
#include <string>

namespace deblur {

BoundaryCondition parse_boundary(std::string_view name) {
  if (name == "zero") return BoundaryCondition::zero;
  if (name == "periodic") return BoundaryCondition::periodic;
  if (name == "reflexive") return BoundaryCondition::reflexive;
  throw std::invalid_argument("unknown boundary condition '" + std::string(name) +
                              "' (expected zero|periodic|reflexive)");
}

std::string_view to_string(BoundaryCondition bc) {
  switch (bc) {
    case BoundaryCondition::zero: return "zero";
    case BoundaryCondition::periodic: return "periodic";
    case BoundaryCondition::reflexive: return "reflexive";
  }
  return "?";
}

Image::Image(Index rows, Index cols, int channels) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("image dimensions must be >= 1");
  if (channels != 1 && channels != 3) throw std::invalid_argument("image must have 1 or 3 channels");
  channels_.assign(static_cast<std::size_t>(channels), Grid::Zero(rows, cols));
}

Image::Image(Grid single) : Image(std::vector<Grid>{std::move(single)}) {}

Image::Image(std::vector<Grid> channels) : channels_(std::move(channels)) {
  if (channels_.size() != 1 && channels_.size() != 3)
    throw std::invalid_argument("image must have 1 or 3 channels");
  rows_ = channels_.front().rows();
  cols_ = channels_.front().cols();
  if (rows_ < 1 || cols_ < 1) throw std::invalid_argument("image dimensions must be >= 1");
  for (const auto& c : channels_) {
    if (c.rows() != rows_ || c.cols() != cols_)
      throw std::invalid_argument("image channels differ in shape");
  }
}

Vector vectorize(const Grid& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

Grid unvectorize(const Vector& v, Index rows, Index cols) {
  if (rows * cols != v.size())
    throw std::invalid_argument("unvectorize: length " + std::to_string(v.size()) +
                                " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  return Eigen::Map<const Grid>(v.data(), rows, cols);
}

Index boundary_index(Index p, Index size, BoundaryCondition bc) {
  if (p >= 0 && p < size) return p;
  switch (bc) {
    case BoundaryCondition::zero:
      return -1;
    case BoundaryCondition::periodic: {
      Index r = p % size;
      return r < 0 ? r + size : r;
    }
    case BoundaryCondition::reflexive: {
      // Fold into one period of length 2 * size of the symmetric extension.
      const Index period = 2 * size;
      Index r = p % period;
      if (r < 0) r += period;
      return r < size ? r : period - 1 - r;
    }
  }
  return -1;
}

Grid pad(const Grid& x, BoundaryCondition bc, Index margin) {
  if (margin < 0) throw std::invalid_argument("pad: margin must be >= 0");
  const Index m = x.rows();
  const Index n = x.cols();
  if (bc == BoundaryCondition::reflexive && margin > 0 && margin >= std::min(m, n))
    throw std::invalid_argument("pad: reflexive margin " + std::to_string(margin) +
                                " exhausts the mirror source (image is " + std::to_string(m) + "x" +
                                std::to_string(n) + ")");
  Grid out(m + 2 * margin, n + 2 * margin);
  for (Index j = 0; j < out.cols(); ++j) {
    const Index sj = boundary_index(j - margin, n, bc);
    for (Index i = 0; i < out.rows(); ++i) {
      const Index si = boundary_index(i - margin, m, bc);
      out(i, j) = (si < 0 || sj < 0) ? 0.0 : x(si, sj);
    }
  }
  return out;
}

}  // namespace deblur
