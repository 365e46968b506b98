#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace anisonorm::detail {
namespace {

// fftw planning is not thread-safe; execution of a finished plan is.
class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(const std::vector<std::size_t>& dims, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(dims, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        std::vector<int> n(dims.begin(), dims.end());
        std::size_t total = 1;
        for (auto d : dims) total *= d;
        auto* in = fftw_alloc_complex(total);
        auto* out = fftw_alloc_complex(total);
        fftw_plan plan = fftw_plan_dft(static_cast<int>(n.size()), n.data(), in, out,
                                       sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(in);
        fftw_free(out);
        plans_.emplace(std::move(key), plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::vector<std::size_t>, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

}  // namespace

void fft(const std::vector<std::size_t>& dims, std::span<const cplx> in, std::span<cplx> out, int sign) {
    fftw_plan plan = cache().get(dims, sign);
    // fftw does not modify the input of an out-of-place complex transform.
    auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
    auto* dst = reinterpret_cast<fftw_complex*>(out.data());
    fftw_execute_dft(plan, src, dst);
}

}  // namespace anisonorm::detail
