#pragma once

#include <Eigen/Dense>

#include <string_view>
#include <vector>

namespace deblur {

using Index = Eigen::Index;
/// One channel of pixels. Element (i, j) is row i, column j.
using Grid = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class BoundaryCondition { zero, periodic, reflexive };

BoundaryCondition parse_boundary(std::string_view name);
std::string_view to_string(BoundaryCondition bc);

/// Pixel grid with one or three channels of identical shape.
///
/// Values are nominally in [0, 1] but nothing in the library clamps them;
/// clamping happens only when writing an image file.
class Image {
 public:
  Image() = default;
  Image(Index rows, Index cols, int channels = 1);
  explicit Image(Grid single);
  explicit Image(std::vector<Grid> channels);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  int channel_count() const { return static_cast<int>(channels_.size()); }
  Index pixel_count() const { return rows_ * cols_ * channel_count(); }

  const Grid& channel(int c) const { return channels_.at(static_cast<std::size_t>(c)); }
  Grid& channel(int c) { return channels_.at(static_cast<std::size_t>(c)); }
  const std::vector<Grid>& channels() const { return channels_; }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Grid> channels_;
};

/// Column-stacking: element (i, j) lands at position j * rows + i.
Vector vectorize(const Grid& x);
Grid unvectorize(const Vector& v, Index rows, Index cols);

/// Source index for padded position `p` (may be negative or >= size).
/// Returns -1 for positions that read zero under the zero condition.
/// The reflexive rule is half-sample symmetric: ... b a | a b c | c b ...
Index boundary_index(Index p, Index size, BoundaryCondition bc);

/// Extends `x` by `margin` pixels on every side.
Grid pad(const Grid& x, BoundaryCondition bc, Index margin);

}  // namespace deblur
