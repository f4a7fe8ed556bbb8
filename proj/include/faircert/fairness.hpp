#pragma once

#include <stdexcept>
#include <string>

namespace faircert {

// Group-fairness notions shared by the tree criterion, the certificates and
// the empirical metrics. EOpp restricts attention to rows with y=1; EO
// averages the y=0 and y=1 restrictions.
enum class FairnessTarget { DP, EOpp, EO };

inline std::string fairness_target_name(FairnessTarget t) {
    switch (t) {
        case FairnessTarget::DP: return "dp";
        case FairnessTarget::EOpp: return "eopp";
        case FairnessTarget::EO: return "eo";
    }
    throw std::logic_error("unknown fairness target");
}

inline FairnessTarget fairness_target_from_name(const std::string& name) {
    if (name == "dp") return FairnessTarget::DP;
    if (name == "eopp") return FairnessTarget::EOpp;
    if (name == "eo") return FairnessTarget::EO;
    throw std::invalid_argument("unknown fairness target '" + name + "'");
}

}  // namespace faircert
