#pragma once

#include <initializer_list>

#include "disctrans/error.hpp"
#include "disctrans/markov.hpp"

namespace testing {

// True when fn throws a disctrans::Error with the given code.
inline bool throws(disctrans::Errc code, auto&& fn) {
  try {
    fn();
  } catch (const disctrans::Error& e) {
    return e.code() == code;
  }
  return false;
}

inline disctrans::Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  disctrans::Matrix m(rows.size(), rows.begin()->size());
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline disctrans::Vector vec(std::initializer_list<double> v) {
  disctrans::Vector out(v.size());
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace testing
