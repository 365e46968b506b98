#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

#include "anisonorm/grid.hpp"

namespace anisonorm::detail {

/// Runs body(i) for i in [0, count) on up to max_threads() workers.
/// Each index must write only its own output slot so results do not depend on scheduling.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(max_threads(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

/// Pairwise sum of equally shaped arrays in a fixed tree order.
template <class T>
std::vector<T> tree_sum(std::vector<std::vector<T>> terms) {
    if (terms.empty()) return {};
    while (terms.size() > 1) {
        std::vector<std::vector<T>> next;
        for (std::size_t i = 0; i + 1 < terms.size(); i += 2) {
            auto& lhs = terms[i];
            const auto& rhs = terms[i + 1];
            for (std::size_t k = 0; k < lhs.size(); ++k) lhs[k] += rhs[k];
            next.push_back(std::move(lhs));
        }
        if (terms.size() % 2 == 1) next.push_back(std::move(terms.back()));
        terms = std::move(next);
    }
    return std::move(terms.front());
}

}  // namespace anisonorm::detail
