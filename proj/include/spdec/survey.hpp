#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

namespace spdec {

// Unnormalized mass vector over the three warning states {true, indifferent,
// false}.
struct Vec3 {
    double t = 0.0;
    double i = 0.0;
    double f = 0.0;

    double norm() const { return t + i + f; }
};

// Normalized survey: t + i + f == 1, all components >= 0.
struct Survey {
    double t = 0.0;
    double i = 1.0;
    double f = 0.0;

    Vec3 vec() const { return {t, i, f}; }
};

// The identity of the combination product; also the trivial survey.
inline constexpr Survey identity_survey() { return Survey{0.0, 1.0, 0.0}; }

// Combination product of two mass vectors. Contradictory mass (t against f)
// is dropped.
inline Vec3 product(const Vec3& v, const Vec3& w) {
    return {v.t * w.t + v.i * w.t + v.t * w.i,
            v.i * w.i,
            v.f * w.f + v.i * w.f + v.f * w.i};
}

// nullopt when all mass annihilated (a contradiction).
inline std::optional<Survey> normalize(const Vec3& v) {
    const double n = v.norm();
    if (!(n > 0.0)) return std::nullopt;
    return Survey{v.t / n, v.i / n, v.f / n};
}

// Sign action of a literal on a survey: a negated occurrence swaps the
// true/false components.
inline Survey literal_flip(const Survey& s, bool negated) {
    return negated ? Survey{s.f, s.i, s.t} : s;
}

inline Vec3 literal_flip(const Vec3& v, bool negated) {
    return negated ? Vec3{v.f, v.i, v.t} : v;
}

// 1 - min(t, f): fixing a variable along its majority direction keeps this
// fraction of the warning solutions.
inline double certitude(const Survey& s) { return 1.0 - std::min(s.t, s.f); }

inline double polarization(const Survey& s) { return std::abs(s.t - s.f); }

// Running product with periodic renormalization so that long products
// (high-degree nodes) neither underflow nor lose their log-norm.
class LogProduct {
public:
    void multiply(const Vec3& v) {
        acc_ = product(acc_, v);
        if ((++count_ & 15) == 0) rescale();
    }

    // log of the norm of the accumulated product; nullopt once annihilated
    std::optional<double> log_norm() const {
        const double n = acc_.norm();
        if (!(n > 0.0)) return std::nullopt;
        return log_ + std::log(n);
    }

    std::optional<Survey> normalized() const {
        auto s = normalize(acc_);
        if (!s) return std::nullopt;
        return s;
    }

private:
    void rescale() {
        const double n = acc_.norm();
        if (n > 0.0) {
            log_ += std::log(n);
            acc_ = {acc_.t / n, acc_.i / n, acc_.f / n};
        }
    }

    Vec3 acc_{0.0, 1.0, 0.0};
    double log_ = 0.0;
    int count_ = 0;
};

}  // namespace spdec
