#include "rirkit/error.hpp"

namespace rirkit {

void throw_error(const std::string& what) { throw Error(what); }

}  // namespace rirkit
