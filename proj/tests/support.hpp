#pragma once

// Hand-rolled generators and helpers shared by the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "audsem/synthesize.hpp"

namespace testsupport {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    std::int64_t range(std::int64_t lo, std::int64_t hi) {  // inclusive
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
    }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
    bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(range(0, static_cast<std::int64_t>(n) - 1)); }

    template <typename T>
    const T& pick(const std::vector<T>& v) { return v[index(v.size())]; }

    std::string word() {
        static const std::vector<std::string> kWords = {
            "dog",  "bark",   "rain", "soft",  "door", "loud",  "quiet", "metal", "clang", "wind",
            "far",  "near",   "room", "steps", "hum",  "bird",  "song",  "deep",  "sharp", "crowd",
            "echo", "wooden", "a",    "the",   "of",   "slowly", "tap",  "glass", "water", "engine",
        };
        return pick(kWords);
    }

    std::string words(std::size_t n) {
        std::string out;
        for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + word();
        return out;
    }

    // Bytes biased towards tag syntax.
    std::string noisy_text(std::size_t max_len) {
        static const std::vector<std::string> kPieces = {
            "<think>", "</think>", "<thinking>", "</thinking>", "<semantic_elements>", "</semantic_elements>",
            "<answer>", "</answer>", "<", ">", "/", " ", "\n", "\t", "word", "<answer", "answer>", "<<",
        };
        std::string out;
        const auto len = static_cast<std::size_t>(range(0, static_cast<std::int64_t>(max_len)));
        while (out.size() < len) {
            if (coin(0.6)) out += pick(kPieces);
            else out.push_back(static_cast<char>(range(0, 255)));
        }
        return out;
    }

    audsem::synth::StructuredTriplet triplet(bool semantic) {
        audsem::synth::StructuredTriplet t;
        t.thinking = words(static_cast<std::size_t>(range(1, 80)));
        t.answer = words(static_cast<std::size_t>(range(1, 40)));
        if (semantic) {
            audsem::synth::SemanticDescriptors s;
            for (auto& f : s.fields) {
                if (coin(0.7)) f = words(static_cast<std::size_t>(range(1, 8)));
            }
            if (!s.any()) s.fields[0] = word();
            t.semantic = s;
        }
        return t;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("audsem-test-" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace testsupport
