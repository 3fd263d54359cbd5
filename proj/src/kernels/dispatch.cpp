#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <string_view>

#include "wlbound/kernels.hpp"

namespace wlbound::kernels {

namespace {

struct Table {
    double (*dot)(const double*, const double*, std::size_t);
    double (*squared_distance)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
};

constexpr Table scalar_table{&scalar::dot, &scalar::squared_distance, &scalar::axpy};

#if defined(WLBOUND_HAVE_AVX2)
constexpr Table avx2_table{&avx2::dot, &avx2::squared_distance, &avx2::axpy};
#endif

bool cpu_has_avx2() noexcept {
#if defined(WLBOUND_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa initial_isa() noexcept {
    Isa isa = detect_isa();
    if (const char* env = std::getenv("WLBOUND_ISA")) {
        const std::string_view requested(env);
        if (requested == "scalar") isa = Isa::scalar;
    }
    return isa;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

const Table& table() {
#if defined(WLBOUND_HAVE_AVX2)
    if (current().load(std::memory_order_relaxed) == Isa::avx2) return avx2_table;
#endif
    return scalar_table;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

Isa detect_isa() noexcept { return cpu_has_avx2() ? Isa::avx2 : Isa::scalar; }

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

bool set_isa(Isa isa) noexcept {
    if (isa == Isa::avx2 && !cpu_has_avx2()) {
        current().store(Isa::scalar);
        return false;
    }
    current().store(isa);
    return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return table().dot(a.data(), b.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return table().squared_distance(a.data(), b.data(), a.size());
}

double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    table().axpy(alpha, x.data(), y.data(), x.size());
}

void gemv(const Matrix& w, std::span<const double> x, std::span<double> y) {
    assert(w.rows() == y.size() && w.cols() == x.size());
    const Table& t = table();
    for (std::size_t r = 0; r < w.rows(); ++r) y[r] = t.dot(w.row(r).data(), x.data(), x.size());
}

void pairwise_distances(const Matrix& x, const Matrix& y, Matrix& out) {
    assert(x.cols() == y.cols() || x.empty() || y.empty());
    out = Matrix(x.rows(), y.rows());
    const Table& t = table();
    const std::size_t d = x.cols();
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* xi = x.row(i).data();
        for (std::size_t j = 0; j < y.rows(); ++j) {
            out(i, j) = std::sqrt(t.squared_distance(xi, y.row(j).data(), d));
        }
    }
}

}  // namespace wlbound::kernels
