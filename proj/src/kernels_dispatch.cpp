#include "gridcover/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace gridcover::kernels {

#if !defined(GRIDCOVER_HAVE_AVX2)
const Ops* avx2_ops() { return nullptr; }
#endif

namespace {

const Ops& resolve() {
    const char* req = std::getenv("GRIDCOVER_KERNELS");
    const std::string choice = req ? req : "auto";
    if (choice == "scalar") return scalar_ops();
    if (choice == "avx2") {
        const Ops* ops = avx2_ops();
        if (!ops)
            throw std::runtime_error(
                "GRIDCOVER_KERNELS=avx2 but AVX2+FMA is unavailable on this CPU/build");
        return *ops;
    }
    if (choice != "auto")
        throw std::runtime_error("unknown GRIDCOVER_KERNELS value: " + choice);
    const Ops* ops = avx2_ops();
    return ops ? *ops : scalar_ops();
}

}  // namespace

const Ops& active_ops() {
    static const Ops& ops = resolve();
    return ops;
}

}  // namespace gridcover::kernels
