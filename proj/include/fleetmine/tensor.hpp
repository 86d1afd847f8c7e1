#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fleetmine/date.hpp"
#include "fleetmine/error.hpp"
#include "fleetmine/records.hpp"

namespace fleetmine {

// Dense nonnegative 3-way array, laid out mode-1 major:
// offset(i, j, k) = (i * J + j) * K + k.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(std::size_t i, std::size_t j, std::size_t k)
        : dims_{i, j, k}, values_(i * j * k, 0.0) {
        if (i == 0 || j == 0 || k == 0)
            throw std::invalid_argument("tensor dims must be positive");
    }

    std::size_t dim(int mode) const { return dims_[mode]; }
    std::size_t size() const { return values_.size(); }

    double& at(std::size_t i, std::size_t j, std::size_t k) {
        return values_[(i * dims_[1] + j) * dims_[2] + k];
    }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return values_[(i * dims_[1] + j) * dims_[2] + k];
    }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

private:
    std::size_t dims_[3] = {0, 0, 0};
    std::vector<double> values_;
};

enum class TimeEncoding { AbsoluteMonth, LifetimeYear };
enum class CountTransform { Raw, Log1p };

// Axis labels for a built tensor: vehicles sorted by (model_year, unit_id),
// systems sorted lexicographically, time bins contiguous.
struct AxisMaps {
    std::vector<std::string> vehicles;
    std::vector<std::string> systems;
    std::vector<std::string> time_bins;
    TimeEncoding encoding = TimeEncoding::AbsoluteMonth;
};

struct TensorBuild {
    Tensor3 tensor;
    AxisMaps maps;
    // LifetimeYear only: job_ids completed before their vehicle's purchase
    // year (negative lifetime bin); excluded from the counts.
    std::vector<std::string> excluded_jobs;
};

inline double tensor_norm(const Tensor3& t) {
    double ss = 0.0;
    for (double v : t.values()) ss += v * v;
    return std::sqrt(ss);
}

// entry [v, s, t] = count of jobs for that vehicle, system and time bin,
// optionally log1p-transformed. AbsoluteMonth bins span the min..max
// completed month contiguously (empty months stay as zero slices);
// LifetimeYear bins index completed year - purchase year, and only vehicles
// with a known model year participate.
inline TensorBuild build_tensor(const FleetDataset& ds, TimeEncoding encoding,
                                CountTransform transform = CountTransform::Raw) {
    if (ds.records.empty()) throw std::invalid_argument("empty tensor: dataset has no records");

    const bool lifetime = encoding == TimeEncoding::LifetimeYear;

    // model year lookup; orphan units only participate in absolute time.
    const auto purchase_year = [&](const std::string& unit) -> int {
        auto it = ds.vehicles.find(unit);
        return it == ds.vehicles.end() ? -1 : it->second.model_year;
    };

    struct VehicleKey {
        int year;
        std::string unit;
        bool operator<(const VehicleKey& o) const {
            if (year != o.year) return year < o.year;
            return unit < o.unit;
        }
    };
    std::set<VehicleKey> vehicle_keys;
    std::set<std::string> systems;
    int min_month = 0, max_month = 0, max_life = -1;
    bool any_time = false;

    TensorBuild build;
    build.maps.encoding = encoding;

    for (const auto& r : ds.records) {
        const int py = purchase_year(r.unit_id);
        if (lifetime && py < 0) continue; // orphan: purchase year unknown
        if (lifetime && r.completed_date.year < py) continue; // excluded below
        vehicle_keys.insert({py < 0 ? 0 : py, r.unit_id});
        systems.insert(r.system_code);
        if (lifetime) {
            max_life = std::max(max_life, r.completed_date.year - py);
        } else {
            const int m = r.completed_date.month_index();
            if (!any_time) {
                min_month = max_month = m;
                any_time = true;
            } else {
                min_month = std::min(min_month, m);
                max_month = std::max(max_month, m);
            }
        }
    }
    if (lifetime) {
        for (const auto& r : ds.records) {
            const int py = purchase_year(r.unit_id);
            if (py >= 0 && r.completed_date.year < py) build.excluded_jobs.push_back(r.job_id);
        }
        std::sort(build.excluded_jobs.begin(), build.excluded_jobs.end());
    }
    if (vehicle_keys.empty())
        throw std::invalid_argument("empty tensor: no records usable under this encoding");

    for (const auto& k : vehicle_keys) build.maps.vehicles.push_back(k.unit);
    build.maps.systems.assign(systems.begin(), systems.end());
    if (lifetime) {
        for (int y = 0; y <= max_life; ++y)
            build.maps.time_bins.push_back("year+" + std::to_string(y));
    } else {
        for (int m = min_month; m <= max_month; ++m)
            build.maps.time_bins.push_back(month_label(m));
    }

    std::map<std::string, std::size_t> v_index, s_index;
    for (std::size_t i = 0; i < build.maps.vehicles.size(); ++i) v_index[build.maps.vehicles[i]] = i;
    for (std::size_t j = 0; j < build.maps.systems.size(); ++j) s_index[build.maps.systems[j]] = j;

    build.tensor = Tensor3(build.maps.vehicles.size(), build.maps.systems.size(),
                           build.maps.time_bins.size());
    for (const auto& r : ds.records) {
        const int py = purchase_year(r.unit_id);
        if (lifetime && py < 0) continue;
        std::size_t t;
        if (lifetime) {
            const int life = r.completed_date.year - py;
            if (life < 0) continue;
            t = static_cast<std::size_t>(life);
        } else {
            t = static_cast<std::size_t>(r.completed_date.month_index() - min_month);
        }
        build.tensor.at(v_index.at(r.unit_id), s_index.at(r.system_code), t) += 1.0;
    }

    if (transform == CountTransform::Log1p)
        for (double& v : build.tensor.values()) v = std::log1p(v);

    return build;
}

} // namespace fleetmine
