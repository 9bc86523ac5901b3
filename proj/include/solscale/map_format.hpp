#pragma once

#include <string>
#include <vector>

#include "solscale/qi.hpp"

namespace solscale {

// Text form of a map, one stage per line (or separated by ';'), coordinates 1-based:
//   affine i m b
//   pwl i b1,b2,... s0,s1,...      (anchored at f(0) = 0)
//   ltrans x1 .. x2n t1 .. t(2n-1)
//   perm s1 .. s2n [tsign]          (tsign only for n = 1)
//   round                           (final stage only)
// Consecutive affine/pwl lines form one coordinate-wise stage.
QiMap parse_map(GroupSpec spec, const std::string& text);
QiMap parse_map(GroupSpec spec, const std::vector<std::string>& lines);

std::vector<std::string> format_map(const QiMap& map);

}  // namespace solscale
