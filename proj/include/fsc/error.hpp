#pragma once

#include <stdexcept>
#include <string>

namespace fsc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw Error(what);
}

}  // namespace fsc
