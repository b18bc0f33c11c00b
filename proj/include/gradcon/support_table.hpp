#pragma once

#include <functional>
#include <vector>

namespace gradcon {

// Periodic smooth support function h(theta) on [0, 2pi), tabulated with
// h, h', h'' and evaluated by quintic Hermite interpolation so that the
// returned derivatives are exact derivatives of the returned values.
class SupportTable {
 public:
  struct Value {
    double h, h1, h2;
  };

  // Build h_k = eta_w * base + offset, where eta_w is the raised-cosine
  // squared bump of half-width w. `kinks` are angles where base is not
  // smooth; the convolution integrals are split there.
  static SupportTable mollified(const std::function<double(double)>& base,
                                std::vector<double> kinks, double width, double offset,
                                int nodes_per_width = 8);

  Value eval(double theta) const;
  double width() const { return width_; }
  double offset() const { return offset_; }
  int size() const { return static_cast<int>(h_.size()); }

 private:
  double dtheta_ = 0.0;
  double width_ = 0.0;
  double offset_ = 0.0;
  std::vector<double> h_, h1_, h2_;
};

}  // namespace gradcon
