#ifndef WCP_WCP_HPP
#define WCP_WCP_HPP

// Weighted contact processes on rooted regular trees.

#include "wcp/bounds.hpp"
#include "wcp/branching.hpp"
#include "wcp/contact.hpp"
#include "wcp/coupled.hpp"
#include "wcp/errors.hpp"
#include "wcp/estimate.hpp"
#include "wcp/parallel.hpp"
#include "wcp/random.hpp"
#include "wcp/rwalk.hpp"
#include "wcp/tree.hpp"
#include "wcp/weights.hpp"

namespace wcp {
inline constexpr const char* kVersion = "0.1.0";
}

#endif  // WCP_WCP_HPP
