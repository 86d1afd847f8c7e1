#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fleetmine/date.hpp"
#include "fleetmine/records.hpp"

namespace fleetmine {

enum class CostGroupKind { Department, MakeModel };

struct CostGrouping {
    CostGroupKind kind = CostGroupKind::Department;
    std::string dept_code;
    std::string make;
    std::string model;

    std::string label() const {
        return kind == CostGroupKind::Department ? "dept:" + dept_code
                                                 : "makemodel:" + make + "/" + model;
    }
};

// Average monthly maintenance cost per active vehicle for one grouping.
// A vehicle counts as active in month M if its model year is <= M's year
// and, when Disposed, its last recorded job is not before M. Disposed
// vehicles with no records never count.
struct CostSeries {
    CostGrouping grouping;
    std::vector<std::string> months; // contiguous labels, "YYYY-MM"
    std::vector<double> values;      // USD per active vehicle per month
    std::vector<int> denominators;   // active-vehicle count (clamped to >= 1)
};

inline CostSeries build_cost_series(const FleetDataset& ds, const CostGrouping& grouping) {
    const auto in_group = [&](const VehicleRecord& v) {
        if (grouping.kind == CostGroupKind::Department) return v.dept_code == grouping.dept_code;
        return v.make == grouping.make && v.model == grouping.model;
    };

    std::map<std::string, int> last_record_month;
    for (const auto& r : ds.records) {
        auto [it, inserted] = last_record_month.try_emplace(r.unit_id,
                                                            r.completed_date.month_index());
        if (!inserted) it->second = std::max(it->second, r.completed_date.month_index());
    }

    bool any = false;
    int min_month = 0, max_month = 0;
    std::map<int, double> month_cost;
    for (const auto& r : ds.records) {
        const auto vit = ds.vehicles.find(r.unit_id);
        if (vit == ds.vehicles.end() || !in_group(vit->second)) continue;
        const int m = r.completed_date.month_index();
        month_cost[m] += r.job_cost.dollars();
        if (!any) {
            min_month = max_month = m;
            any = true;
        } else {
            min_month = std::min(min_month, m);
            max_month = std::max(max_month, m);
        }
    }
    if (!any)
        throw std::invalid_argument("no maintenance records for group " + grouping.label());

    CostSeries series;
    series.grouping = grouping;
    for (int m = min_month; m <= max_month; ++m) {
        int active = 0;
        const int month_year = m / 12;
        for (const auto& [unit, v] : ds.vehicles) {
            if (!in_group(v)) continue;
            if (v.model_year > month_year) continue;
            if (v.status == VehicleStatus::Disposed) {
                const auto lit = last_record_month.find(unit);
                if (lit == last_record_month.end() || lit->second < m) continue;
            }
            ++active;
        }
        const int denom = std::max(active, 1);
        const auto cit = month_cost.find(m);
        const double total = cit == month_cost.end() ? 0.0 : cit->second;
        series.months.push_back(month_label(m));
        series.denominators.push_back(denom);
        series.values.push_back(total / static_cast<double>(denom));
    }
    return series;
}

} // namespace fleetmine
