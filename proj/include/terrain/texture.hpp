// Procedural textures built from the noise generators: sine patterns with
// noise-driven phase turbulence (marble stripes, wood rings) and normalized
// raw noise (clouds). The exact formulas are conventions of this library:
//   marble(u, v) = sin(2 pi * freq * u + gain * noise)
//   wood(u, v)   = sin(2 pi * freq * r + gain * noise),  r = |(u, v) - center|
//   cloud        = noise rescaled to [-1, 1]
// with (u, v) in [0, 1)^2 at pixel centers.
#pragma once

#include <cmath>
#include <string>

#include "terrain/errors.hpp"
#include "terrain/fbm.hpp"

namespace terrain::texture {

enum class Kind { marble, wood, cloud };

inline const char* kind_name(Kind k) {
    switch (k) {
        case Kind::marble: return "marble";
        case Kind::wood: return "wood";
        case Kind::cloud: return "cloud";
    }
    return "?";
}

inline std::optional<Kind> parse_kind(std::string_view name) {
    if (name == "marble") return Kind::marble;
    if (name == "wood") return Kind::wood;
    if (name == "cloud") return Kind::cloud;
    return std::nullopt;
}

struct TextureSpec {
    Kind kind = Kind::marble;
    fbm::FbmConfig fbm;               // underlying noise field
    double gain = 1.0;                // turbulence strength added to the sine phase
    double pattern_frequency = 4.0;   // stripes or rings across the image

    void validate() const {
        fbm.validate();
        if (!(pattern_frequency > 0.0) || !std::isfinite(pattern_frequency))
            throw ValidationError("TextureSpec: pattern frequency must be positive");
        if (!std::isfinite(gain)) throw ValidationError("TextureSpec: non-finite gain");
    }
};

inline fbm::Heightmap render(const TextureSpec& spec) {
    spec.validate();
    fbm::FbmConfig cfg = spec.fbm;
    cfg.normalize = false;  // cloud normalizes explicitly; sine kinds use raw noise
    fbm::Heightmap hm = fbm::generate_heightmap(cfg);
    if (spec.kind == Kind::cloud) return fbm::normalize_map(hm);

    const int R = cfg.resolution;
    const double two_pi = 2.0 * std::acos(-1.0);
    for (int y = 0; y < R; ++y) {
        const double v = (static_cast<double>(y) + 0.5) / static_cast<double>(R);
        for (int x = 0; x < R; ++x) {
            const double u = (static_cast<double>(x) + 0.5) / static_cast<double>(R);
            double& cell = hm.data[static_cast<std::size_t>(y) * static_cast<std::size_t>(R) +
                                   static_cast<std::size_t>(x)];
            const double phase = spec.kind == Kind::marble
                                     ? u
                                     : std::sqrt((u - 0.5) * (u - 0.5) + (v - 0.5) * (v - 0.5));
            cell = std::sin(two_pi * spec.pattern_frequency * phase + spec.gain * cell);
        }
    }
    return hm;
}

}  // namespace terrain::texture
