#include "ihdg/config.hpp"

#include "ihdg/errors.hpp"

namespace ihdg {

Variant parse_variant(const std::string& s)
{
    if (s == "A" || s == "a")
        return Variant::A;
    if (s == "B" || s == "b")
        return Variant::B;
    if (s == "C" || s == "c")
        return Variant::C;
    throw InvalidArgument("unknown variant '" + s + "' (expected A, B or C)");
}

char variant_letter(Variant v) noexcept
{
    switch (v) {
    case Variant::A:
        return 'A';
    case Variant::B:
        return 'B';
    case Variant::C:
        return 'C';
    }
    return '?';
}

DegreeConfig::DegreeConfig(Variant v, int degree)
    : variant(v)
    , k(degree)
{
    if (k < 0 || k > 3)
        throw ConfigError("polynomial degree k = " + std::to_string(k) + " not supported (0 <= k <= 3)");
    if (v == Variant::C && k < 1)
        throw ConfigError("HDG (C) requires k >= 1");
}

std::string DegreeConfig::name() const
{
    return std::string("HDG (") + variant_letter(variant) + "), k=" + std::to_string(k);
}

} // namespace ihdg
