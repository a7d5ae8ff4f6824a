#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace rtm {

/// Dense literal vector over f features, laid out as [x_1..x_f, !x_1..!x_f].
/// Bit k of the packed words is literal k, so the negated half always mirrors
/// the positive half.
class LiteralVector {
public:
    LiteralVector() = default;

    /// All features false (negated half all true).
    explicit LiteralVector(std::size_t features)
        : features_(features), words_((2 * features + 63) / 64, 0) {
        for (std::size_t i = 0; i < features; ++i) set_bit(features + i, true);
    }

    static LiteralVector from_features(std::span<const std::uint8_t> bits) {
        LiteralVector v(bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i) v.set_feature(i, bits[i] != 0);
        return v;
    }

    std::size_t features() const { return features_; }
    std::size_t size() const { return 2 * features_; }

    bool operator[](std::size_t literal) const {
        return (words_[literal >> 6] >> (literal & 63)) & 1U;
    }

    bool feature(std::size_t i) const { return (*this)[i]; }

    void set_feature(std::size_t i, bool value) {
        if (i >= features_) throw std::out_of_range("feature index out of range");
        set_bit(i, value);
        set_bit(features_ + i, !value);
    }

    std::size_t count_features() const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < features_; ++i) n += feature(i);
        return n;
    }

    std::span<const std::uint64_t> words() const { return words_; }

    friend bool operator==(const LiteralVector&, const LiteralVector&) = default;

private:
    void set_bit(std::size_t k, bool value) {
        const std::uint64_t mask = std::uint64_t{1} << (k & 63);
        if (value) words_[k >> 6] |= mask;
        else words_[k >> 6] &= ~mask;
    }

    std::size_t features_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace rtm
