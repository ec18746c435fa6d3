// Copyright 2026 The xres Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef XRES_MALLOC_TUNING_HPP_
#define XRES_MALLOC_TUNING_HPP_

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace xres {

/// For executables only. Hypothesis rendering allocates and frees image
/// planes of a few hundred KiB at a high rate; with glibc's defaults each one
/// is a fresh mmap and a round of page faults. Keeping them on the heap
/// roughly halves gallery rendering time.
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
  mallopt(M_TOP_PAD, 64 << 20);
#endif
}

}  // namespace xres

#endif  // XRES_MALLOC_TUNING_HPP_
