#include "specforge/kernels.hpp"

#include <atomic>
#include <cstdlib>

#include "specforge/errors.hpp"

namespace specforge::kernels {
namespace {

std::atomic<const Ops*> g_active{nullptr};

const Ops* select_default() {
    if (const char* env = std::getenv("SPECFORGE_KERNEL")) {
        std::string name(env);
        if (name == "scalar") return &scalar_ops();
        if (name == "avx2") {
            if (const Ops* ops = avx2_ops()) return ops;
            throw ConfigError("SPECFORGE_KERNEL=avx2 but AVX2 is unavailable");
        }
        if (!name.empty())
            throw ConfigError("unknown SPECFORGE_KERNEL value: " + name);
    }
    if (const Ops* ops = avx2_ops()) return ops;
    return &scalar_ops();
}

}  // namespace

const Ops& active() {
    const Ops* ops = g_active.load(std::memory_order_acquire);
    if (!ops) {
        ops = select_default();
        g_active.store(ops, std::memory_order_release);
    }
    return *ops;
}

void force(const std::string& name) {
    if (name == "scalar") {
        g_active.store(&scalar_ops(), std::memory_order_release);
        return;
    }
    if (name == "avx2") {
        if (const Ops* ops = avx2_ops()) {
            g_active.store(ops, std::memory_order_release);
            return;
        }
        throw ConfigError("AVX2 kernels unavailable on this CPU/build");
    }
    throw ConfigError("unknown kernel variant: " + name);
}

std::vector<std::string> available() {
    std::vector<std::string> out{"scalar"};
    if (avx2_ops()) out.emplace_back("avx2");
    return out;
}

}  // namespace specforge::kernels
