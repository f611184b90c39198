#include "fgradar/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace fgradar::fft {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct Buffer {
    fftw_complex* ptr = nullptr;
    explicit Buffer(std::size_t n) : ptr(fftw_alloc_complex(n)) {}
    ~Buffer() { fftw_free(ptr); }
};

}  // namespace

struct Plan::Impl {
    fftw_plan plan = nullptr;
    ~Impl() {
        std::lock_guard lock(planner_mutex());
        if (plan) fftw_destroy_plan(plan);
    }
};

Plan::Plan(std::size_t n, Direction dir) : impl_(std::make_unique<Impl>()), size_(n) {
    if (n == 0) throw std::invalid_argument("fft: zero length");
    std::lock_guard lock(planner_mutex());
    Buffer buf(n);
    // FFTW_UNALIGNED lets us run the plan on std::vector storage.
    impl_->plan = fftw_plan_dft_1d(static_cast<int>(n), buf.ptr, buf.ptr,
                                   dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!impl_->plan) throw std::runtime_error("fft: planning failed");
}

Plan::Plan(std::size_t n0, std::size_t n1, Direction dir)
    : impl_(std::make_unique<Impl>()), size_(n0 * n1) {
    if (size_ == 0) throw std::invalid_argument("fft: zero size");
    std::lock_guard lock(planner_mutex());
    Buffer buf(size_);
    impl_->plan = fftw_plan_dft_2d(static_cast<int>(n0), static_cast<int>(n1), buf.ptr, buf.ptr,
                                   dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!impl_->plan) throw std::runtime_error("fft: planning failed");
}

Plan::~Plan() = default;
Plan::Plan(Plan&&) noexcept = default;
Plan& Plan::operator=(Plan&&) noexcept = default;

void Plan::execute(std::span<std::complex<double>> data) const {
    if (data.size() != size_) throw std::invalid_argument("fft: buffer size mismatch");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(impl_->plan, p, p);
}

void forward_padded(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
    if (out.size() < in.size()) throw std::invalid_argument("fft: output shorter than input");
    std::copy(in.begin(), in.end(), out.begin());
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(in.size()), out.end(), std::complex<double>{});
    Plan plan(out.size(), Direction::Forward);
    plan.execute(out);
}

}  // namespace fgradar::fft
