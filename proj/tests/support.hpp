#pragma once

#include <string>

#include "ceg/io.hpp"

namespace ceg::test {

inline std::string fixture(const std::string& name) { return std::string(CEG_FIXTURE_DIR) + "/" + name; }

inline EventTree load_tree_fixture(const std::string& name) { return load_tree(fixture(name)); }
inline Ceg load_ceg_fixture(const std::string& name) { return load_ceg(fixture(name)); }
inline EventExpr load_event_fixture(const std::string& name) { return load_event(fixture(name)); }

inline Rat R(long n, long d = 1) { return Rat(n) / Rat(d); }

}  // namespace ceg::test
