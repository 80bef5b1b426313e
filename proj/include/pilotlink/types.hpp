// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pilotlink {

using Complex = std::complex<double>;
using SymbolVector = std::vector<Complex>;
using Bits = std::vector<std::uint8_t>;   // one bit per element, values 0/1
using Bytes = std::vector<std::uint8_t>;

inline constexpr double kPi = 3.14159265358979323846;

/// Half-open index range [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool operator==(const IndexRange&) const = default;
};

/// Complex baseband samples together with their sampling period.
class ComplexBuffer {
public:
    ComplexBuffer() = default;
    ComplexBuffer(SymbolVector samples, double sample_period)
        : samples_(std::move(samples)), sample_period_(sample_period)
    {
        if (!(sample_period > 0.0))
            throw std::invalid_argument("ComplexBuffer: sample period must be positive");
    }

    const SymbolVector& samples() const { return samples_; }
    SymbolVector& samples() { return samples_; }
    double sample_period() const { return sample_period_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }

    const Complex& operator[](std::size_t i) const { return samples_[i]; }
    Complex& operator[](std::size_t i) { return samples_[i]; }

private:
    SymbolVector samples_;
    double sample_period_ = 1.0;
};

}  // namespace pilotlink
