#pragma once

#include <string>

namespace ihdg {

/// HDG (A), (B), (C): scalar degree l = k+1, k, k-1.
enum class Variant { A, B, C };

[[nodiscard]] Variant parse_variant(const std::string& s);
[[nodiscard]] char variant_letter(Variant v) noexcept;

/// Polynomial degrees of one method: flux and traces use k, the scalar uses l,
/// the postprocessed scalar uses k+1. Stabilization is tau = 1/h_K.
struct DegreeConfig {
    Variant variant = Variant::A;
    int k = 0;

    DegreeConfig() = default;
    /// Throws ConfigError for k < 0, k > 3, or variant C with k = 0.
    DegreeConfig(Variant v, int degree);

    [[nodiscard]] int scalar_degree() const noexcept
    {
        switch (variant) {
        case Variant::A:
            return k + 1;
        case Variant::B:
            return k;
        case Variant::C:
            return k - 1;
        }
        return k;
    }
    [[nodiscard]] int postprocess_degree() const noexcept { return k + 1; }

    [[nodiscard]] std::string name() const;
};

} // namespace ihdg
