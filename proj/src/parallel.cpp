#include "ordcert/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ordcert {

int default_thread_count() {
  if (const char* env = std::getenv("ORDCERT_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

}  // namespace ordcert
