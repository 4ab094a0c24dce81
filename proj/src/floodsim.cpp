#include "waterline/floodsim.hpp"

#include <algorithm>
#include <numeric>

#include "waterline/errors.hpp"

namespace waterline {

RegionMask water_mask(const Raster& dem, double level, const RegionMask& region) {
    if (dem.width != region.width || dem.height != region.height ||
        !(dem.transform == region.transform))
        throw Error("floodsim", "DEM grid does not match the region mask");

    RegionMask out(region.width, region.height, region.transform);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < region.height; ++r) {
        for (int c = 0; c < region.width; ++c) {
            const size_t i = region.index(r, c);
            if (!region.bits[i]) continue;
            const float v = dem.values[i];
            if (dem.is_nodata(v)) continue;  // nodata terrain is never submerged
            if (v <= level) out.bits[i] = 1;
        }
    }
    return out;
}

namespace {

int find_root(std::vector<int32_t>& parent, int x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];  // path halving
        x = parent[x];
    }
    return x;
}

void unite(std::vector<int32_t>& parent, int a, int b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a == b) return;
    if (a < b) parent[b] = a;
    else parent[a] = b;
}

}  // namespace

LabelGrid connected_components(const RegionMask& mask, Connectivity connectivity) {
    const int w = mask.width;
    const int h = mask.height;
    LabelGrid grid;
    grid.width = w;
    grid.height = h;
    grid.transform = mask.transform;
    grid.labels.assign(static_cast<size_t>(w) * h, 0);
    if (w == 0 || h == 0) return grid;

    // Union-find over pixel indices, merging with already-visited neighbors;
    // roots end up being the row-major first pixel of each component.
    std::vector<int32_t> parent(mask.bits.size());
    std::iota(parent.begin(), parent.end(), 0);

    const bool diag = connectivity == Connectivity::eight;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const int i = r * w + c;
            if (!mask.bits[i]) continue;
            if (c > 0 && mask.bits[i - 1]) unite(parent, i, i - 1);
            if (r > 0) {
                if (mask.bits[i - w]) unite(parent, i, i - w);
                if (diag && c > 0 && mask.bits[i - w - 1]) unite(parent, i, i - w - 1);
                if (diag && c + 1 < w && mask.bits[i - w + 1]) unite(parent, i, i - w + 1);
            }
        }
    }

    // Smaller-index-wins unions make each root the component's first
    // row-major pixel, so labeling roots on first sight yields the canonical
    // first-encounter numbering.
    int next_label = 0;
    for (size_t i = 0; i < mask.bits.size(); ++i) {
        if (!mask.bits[i]) continue;
        const int root = find_root(parent, static_cast<int>(i));
        if (grid.labels[root] == 0) grid.labels[root] = ++next_label;
        grid.labels[i] = grid.labels[root];
    }
    grid.count = next_label;
    return grid;
}

RegionMask largest_component(const LabelGrid& labels) {
    RegionMask out(labels.width, labels.height, labels.transform);
    if (labels.count == 0) return out;

    std::vector<long> sizes(labels.count + 1, 0);
    for (int32_t l : labels.labels)
        if (l > 0) ++sizes[l];

    int best = 1;
    for (int l = 2; l <= labels.count; ++l)
        if (sizes[l] > sizes[best]) best = l;  // strict: ties keep the smaller label

    for (size_t i = 0; i < labels.labels.size(); ++i)
        if (labels.labels[i] == best) out.bits[i] = 1;
    return out;
}

PixelSet shoreline(const RegionMask& component) {
    const int w = component.width;
    const int h = component.height;
    std::vector<PixelSet> rows(h);

#pragma omp parallel for schedule(static)
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!component.at(r, c)) continue;
            const bool boundary = r == 0 || !component.at(r - 1, c) ||
                                  r == h - 1 || !component.at(r + 1, c) ||
                                  c == 0 || !component.at(r, c - 1) ||
                                  c == w - 1 || !component.at(r, c + 1);
            if (boundary) rows[r].push_back({r, c});
        }
    }

    PixelSet out;
    for (auto& row : rows) out.insert(out.end(), row.begin(), row.end());
    return out;
}

}  // namespace waterline
