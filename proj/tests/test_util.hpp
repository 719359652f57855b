#pragma once

#include <string>

#include "tiltcheck/problem.hpp"

inline std::string fixture_path(const std::string& name) {
  return std::string(TILTCHECK_FIXTURES_DIR) + "/" + name;
}

inline tiltcheck::Problem load_fixture(const std::string& name) {
  return tiltcheck::load_problem(fixture_path(name));
}
