#include "util.hpp"

#include <mutex>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace tag {

void tune_allocator_once() {
  static std::once_flag flag;
  std::call_once(flag, [] {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 64 * 1024 * 1024);
    mallopt(M_TRIM_THRESHOLD, 256 * 1024 * 1024);
#endif
  });
}

}  // namespace tag
