#include "auricle/parallel.hpp"

namespace auricle {
namespace {

int g_threads = 1;

}  // namespace

void set_threads(int n) { g_threads = n < 1 ? 1 : n; }

int threads() { return g_threads; }

}  // namespace auricle
