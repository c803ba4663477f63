#include "sgcal/rng.hpp"

namespace sgcal {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(master);
    for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
    return h;
}

Engine make_engine(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::seed_seq seq{static_cast<std::uint32_t>(stream_seed(master, path)),
                      static_cast<std::uint32_t>(stream_seed(master, path) >> 32)};
    return Engine(seq);
}

}  // namespace sgcal
