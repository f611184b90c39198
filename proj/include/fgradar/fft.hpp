#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace fgradar::fft {

enum class Direction { Forward, Inverse };

/// Unnormalized complex DFT of fixed shape backed by FFTW. Forward uses exp(-j...).
/// A plan may be executed concurrently from several threads on distinct buffers.
class Plan {
  public:
    /// One-dimensional transform of length n.
    Plan(std::size_t n, Direction dir);
    /// Two-dimensional transform over a row-major n0 x n1 array.
    Plan(std::size_t n0, std::size_t n1, Direction dir);
    ~Plan();
    Plan(Plan&&) noexcept;
    Plan& operator=(Plan&&) noexcept;
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;

    std::size_t size() const { return size_; }

    /// In-place transform. data.size() must equal size().
    void execute(std::span<std::complex<double>> data) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::size_t size_ = 0;
};

/// Convenience: zero-padded forward 1-D DFT of `in` to length n (n >= in.size()).
void forward_padded(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

}  // namespace fgradar::fft
