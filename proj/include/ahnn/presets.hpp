#ifndef AHNN_PRESETS_HPP
#define AHNN_PRESETS_HPP

// Named parameter sets for the network variants.

#include <string>
#include <string_view>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"

namespace ahnn {

struct Preset {
    std::string name;
    NetworkParams params;
    StimulusProgram stimulus;
    StateVector initial{{0.0, 0.1, 0.0}};
    std::string description;
};

namespace detail {

inline StimulusProgram wms_only() {
    StimulusProgram s;
    s.wms = SquareWave{1.0, 0.01};
    return s;
}

inline Preset make_preset(std::string_view name) {
    Preset p;
    p.name = std::string(name);
    const bool k1 = name.ends_with("-k1");
    p.params.k = k1 ? 1.0 : 1.15;
    const std::string_view base = k1 ? name.substr(0, name.size() - 3) : name;

    if (base == "hnn") {
        p.description = "unstimulated network";
    } else if (base == "wms") {
        p.stimulus = wms_only();
        p.description = "weight-matrix stimulus A=1, omega=0.01";
    } else if (base == "wms-svs1") {
        p.stimulus = wms_only();
        p.stimulus.svs[0] = SquareWave{5.0, 0.02};
        p.description = "weight-matrix stimulus plus x1 offset A1=5, omega1=0.02";
    } else if (base == "wms-svs-multi") {
        p.stimulus = wms_only();
        p.stimulus.svs[0] = SquareWave{5.0, 0.02};
        p.stimulus.svs[2] = SquareWave{12.0, 0.022};
        p.description = "weight-matrix stimulus plus x1 and x3 offsets (planar grid)";
    } else if (base == "wms-svs-3d") {
        p.stimulus = wms_only();
        p.stimulus.svs[0] = SquareWave{5.0, 0.02};
        p.stimulus.svs[1] = SquareWave{5.0, 0.021};
        p.stimulus.svs[2] = SquareWave{12.0, 0.022};
        p.description = "weight-matrix stimulus plus offsets on all three axes (cubic grid)";
    } else if (base == "cs-svs") {
        p.stimulus.svs[0] = SquareWave{0.1, 0.02};
        p.stimulus.cs = 0.1;
        p.description = "constant stimulus A'1=0.1 with x1 offset A1=0.1, omega1=0.02";
    } else if (base == "crypto-default") {
        p.stimulus = wms_only();
        p.stimulus.svs[0] = SquareWave{5.0, 0.2};
        p.stimulus.svs[1] = SquareWave{5.0, 0.22};
        p.stimulus.svs[2] = SquareWave{12.0, 0.21};
        p.description = "keystream network of the default cipher key at cnt=0";
    } else {
        throw RangeError("unknown preset '" + std::string(name) + "'");
    }
    return p;
}

} // namespace detail

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const char* b : {"hnn", "wms", "wms-svs1", "wms-svs-multi", "wms-svs-3d", "cs-svs",
                              "crypto-default"}) {
            n.emplace_back(b);
            n.emplace_back(std::string(b) + "-k1");
        }
        return n;
    }();
    return names;
}

/// Looks up a preset by name; names ending in `-k1` use k = 1.
inline Preset preset(std::string_view name) { return detail::make_preset(name); }

} // namespace ahnn

#endif // AHNN_PRESETS_HPP
