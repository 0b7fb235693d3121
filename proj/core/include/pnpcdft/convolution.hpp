#pragma once

#include <array>
#include <functional>
#include <memory>

#include "pnpcdft/field.hpp"
#include "pnpcdft/grid.hpp"

namespace pnpcdft {

// Orientation of the shift argument in the convolution integral.
//   density:   h(r) = sum_j w_j f(r_j) K(r_j - r) dV   (weighted densities)
//   potential: h(r) = sum_j w_j f(r_j) K(r - r_j) dV   (chemical potentials)
// The two differ only for kernels that are odd under point reflection.
enum class Orientation { density, potential };

// Scalar kernel sampled at a signed offset vector [nm]. The callable must
// handle the zero offset itself (singular kernels carry their own
// regularized value there).
using KernelFn = std::function<double(double sx, double sy, double sz)>;

// Vector kernel (odd under reflection), one value per component.
using VectorKernelFn = std::function<std::array<double, 3>(double sx, double sy, double sz)>;

// Precomputed zero-padded linear convolution on the grid's node lattice.
// The padded transform length per axis is at least 2n-1, rounded up to a
// product of small primes, so periodic wrap-around never touches the data.
// Input fields are weighted with the trapezoid rule (boundary nodes get 1/2
// per axis) before transforming; the kernel spectrum absorbs the cell volume.
//
// apply() reuses internal scratch buffers: a plan is reusable any number of
// times and reapplication is bitwise deterministic, but a single plan must
// not be applied from two threads at once.
class ConvolutionPlan {
 public:
  ConvolutionPlan();
  ~ConvolutionPlan();
  ConvolutionPlan(ConvolutionPlan&&) noexcept;
  ConvolutionPlan& operator=(ConvolutionPlan&&) noexcept;
  ConvolutionPlan(const ConvolutionPlan&) = delete;
  ConvolutionPlan& operator=(const ConvolutionPlan&) = delete;

  bool is_vector() const;
  const GridSpec& grid() const;

  // Scalar-kernel convolution. Throws if this is a vector plan.
  ScalarField apply(const ScalarField& f) const;

  // Vector-kernel convolution, one output component per kernel component.
  // Throws if this is a scalar plan.
  VectorField apply_vector_weight(const ScalarField& f) const;

 private:
  friend ConvolutionPlan plan_kernel(const GridSpec&, const KernelFn&, Orientation);
  friend ConvolutionPlan plan_vector_kernel(const GridSpec&, const VectorKernelFn&, Orientation);
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

ConvolutionPlan plan_kernel(const GridSpec& grid, const KernelFn& kernel,
                            Orientation orientation = Orientation::density);

ConvolutionPlan plan_vector_kernel(const GridSpec& grid, const VectorKernelFn& kernel,
                                   Orientation orientation = Orientation::density);

// Smallest transform length >= n whose prime factors are all in {2,3,5,7}.
int next_fast_fft_size(int n);

}  // namespace pnpcdft
