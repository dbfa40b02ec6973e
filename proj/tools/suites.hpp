#pragma once

#include <heightinterp/reduce.hpp>

#include <string>
#include <vector>

namespace heightinterp::suites {

struct SuiteResult {
  std::string name;
  bool passed = false;
  long checks = 0;
  std::string detail;
};

std::vector<SuiteResult> run_heights(long samples);
std::vector<SuiteResult> run_curve(int range);
std::vector<SuiteResult> run_gadgets(long samples);
std::vector<SuiteResult> run_interp(const Int& multiplier, const Int& m_max);
std::vector<SuiteResult> run_reduce(const Int& multiplier, const Int& m_max);

}  // namespace heightinterp::suites
