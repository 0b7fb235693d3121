#pragma once

#include <cstddef>
#include <functional>

namespace pnpcdft {

// Runs fn over contiguous chunks of [begin, end). With threads <= 1 this is a
// plain call, so single-threaded runs take no locking or scheduling detour.
// Chunking is deterministic and chunks never overlap, so results are
// bitwise identical for any thread count as long as fn only writes its range.
void parallel_for(std::size_t begin, std::size_t end, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace pnpcdft
