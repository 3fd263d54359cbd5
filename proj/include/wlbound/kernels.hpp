#pragma once

#include <span>
#include <string_view>

#include "wlbound/matrix.hpp"

// Arithmetic inner loops shared by the transport solver, the Lipschitz
// estimator and the MPNN forward pass. Each kernel has a scalar reference
// and an AVX2/FMA variant; the variant is picked once at startup from the
// CPU feature bits and can be overridden with WLBOUND_ISA=scalar|avx2.
namespace wlbound::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

// Best variant the running CPU supports.
Isa detect_isa() noexcept;

// Variant currently used by the dispatching entry points below.
Isa active_isa() noexcept;

// Forces a variant. Requesting avx2 on a CPU without it falls back to scalar
// and returns false.
bool set_isa(Isa isa) noexcept;

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
double distance(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// y = W x, with W of shape (y.size(), x.size())
void gemv(const Matrix& w, std::span<const double> x, std::span<double> y);

// out(i, j) = ||x_i - y_j||; out is resized to (x.rows(), y.rows())
void pairwise_distances(const Matrix& x, const Matrix& y, Matrix& out);

// Direct access to the individual variants, used by the equivalence tests.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2

}  // namespace wlbound::kernels
