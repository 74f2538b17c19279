#ifndef SHAPECHECK_TESTS_FIXTURE_HPP
#define SHAPECHECK_TESTS_FIXTURE_HPP

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace shapecheck::testing {

/// Contents of tests/fixtures/<rel>.
inline std::string fixture(const std::string& rel) {
  std::ifstream in(std::string(SHAPECHECK_FIXTURES) + "/" + rel);
  if (!in) throw std::runtime_error("missing fixture " + rel);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace shapecheck::testing

#endif  // SHAPECHECK_TESTS_FIXTURE_HPP
