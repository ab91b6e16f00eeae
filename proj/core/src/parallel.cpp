#include "lagmcf/parallel.hpp"

#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>

#include <tbb/global_control.h>
#include <tbb/info.h>

namespace lagmcf {

namespace {
std::mutex g_mutex;
std::unique_ptr<tbb::global_control> g_control;
int g_threads = 0;
}  // namespace

void set_max_threads(int n) {
  std::lock_guard lock(g_mutex);
  g_control.reset();
  g_threads = 0;
  if (n >= 1) {
    g_control = std::make_unique<tbb::global_control>(
        tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(n));
    g_threads = n;
  }
}

void apply_thread_env() {
  const char* env = std::getenv("LAGMCF_THREADS");
  if (env == nullptr) return;
  try {
    set_max_threads(std::stoi(env));
  } catch (const std::exception&) {
    // unparseable: keep the default
  }
}

int max_threads() {
  std::lock_guard lock(g_mutex);
  return g_threads > 0 ? g_threads : tbb::info::default_concurrency();
}

}  // namespace lagmcf
