#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fleetmine/csv.hpp"
#include "fleetmine/date.hpp"
#include "fleetmine/error.hpp"
#include "fleetmine/money.hpp"

namespace fleetmine {

enum class VehicleStatus { Active, Disposed };

// One row of the vehicles table: manufacture, purchase, and lifetime-to-date
// fields for a single unit.
struct VehicleRecord {
    std::string unit_id;
    std::string dept_code;
    std::string dept_desc;
    std::string make;
    std::string model;
    int model_year = 0;
    Money purchase_cost;
    VehicleStatus status = VehicleStatus::Active;
    Money ltd_maint_cost;
    Money ltd_fuel_cost;
};

// One row of the maintenance table: a single job on a single vehicle.
// job_cost is derived (labor + commercial + part) and kept cent-exact.
struct MaintenanceRecord {
    std::string job_id;
    std::string unit_id;
    std::string work_order_id;
    Date completed_date;
    Date open_date;
    std::string system_code;
    std::string system_desc;
    std::string job_reason;
    Money labor_cost;
    Money commercial_cost;
    Money part_cost;
    Money job_cost;
    long long odometer = 0;
};

struct FleetDataset {
    std::map<std::string, VehicleRecord> vehicles;
    std::vector<MaintenanceRecord> records;
    int cutoff_year = 2010;
    // Records whose unit_id has no vehicle row stay in `records`; their ids
    // are reported here. Lifetime-encoded tensors skip them (unknown
    // purchase year).
    std::vector<std::string> orphan_units;
    // job_ids with completed_date < open_date: flagged, not dropped.
    std::vector<std::string> inconsistent_date_jobs;
};

struct MaintenanceSequence {
    std::string unit_id;
    struct Item {
        std::string system_code;
        Date completed_date;
        std::string job_id;
    };
    std::vector<Item> items; // sorted by (completed_date, job_id)
};

namespace detail {

inline std::size_t require_column(const std::vector<std::string>& header,
                                  std::initializer_list<std::string_view> aliases,
                                  std::string_view display_name) {
    if (auto col = csv::find_column(header, aliases)) return *col;
    throw ParseError("missing required column: " + std::string(display_name));
}

inline Money parse_cost_field(const std::string& text, std::string_view field, std::size_t row_no) {
    Money m;
    try {
        m = parse_money(text);
    } catch (const ParseError&) {
        throw ParseError("row " + std::to_string(row_no) + ": bad " + std::string(field) +
                         " value '" + text + "'");
    }
    if (m.cents < 0)
        throw ParseError("row " + std::to_string(row_no) + ": negative " + std::string(field) +
                         " '" + text + "'");
    return m;
}

inline Date parse_date_field(const std::string& text, std::string_view field, std::size_t row_no) {
    try {
        return parse_date(text);
    } catch (const ParseError&) {
        throw ParseError("row " + std::to_string(row_no) + ": bad " + std::string(field) +
                         " value '" + text + "'");
    }
}

} // namespace detail

// Vehicles table reader. Row numbers in errors are 1-based counting the
// header as row 1.
inline std::vector<VehicleRecord> parse_vehicles(const std::string& path) {
    const csv::Table table = csv::read_file(path);
    if (table.header.empty()) throw ParseError(path + ": missing header row");

    const auto& h = table.header;
    const std::size_t c_unit = detail::require_column(h, {"unit", "unitno", "unitid", "unitnumber"}, "Unit#");
    const std::size_t c_dept = detail::require_column(h, {"dept", "deptno", "deptcode"}, "Dept#");
    const std::size_t c_deptdesc = detail::require_column(h, {"deptdesc", "deptdescription"}, "Dept Desc");
    const std::size_t c_make = detail::require_column(h, {"make"}, "Make");
    const std::size_t c_model = detail::require_column(h, {"model"}, "Model");
    const std::size_t c_year = detail::require_column(h, {"year", "modelyear"}, "Year");
    const std::size_t c_cost = detail::require_column(h, {"purchasecost"}, "Purchase Cost");
    const std::size_t c_status = detail::require_column(h, {"statuscode", "status"}, "Status Code");
    const std::size_t c_maint = detail::require_column(h, {"ltdmaintcost", "ltdmaintenancecost"}, "LTD Maint. Cost");
    const std::size_t c_fuel = detail::require_column(h, {"ltdfuelcost"}, "LTD Fuel Cost");

    std::vector<VehicleRecord> out;
    out.reserve(table.rows.size());
    std::set<std::string> seen;
    std::size_t row_no = 1;
    for (const auto& row : table.rows) {
        ++row_no;
        const auto cell = [&](std::size_t c) -> const std::string& {
            static const std::string empty;
            return c < row.size() ? row[c] : empty;
        };
        VehicleRecord v;
        v.unit_id = cell(c_unit);
        if (v.unit_id.empty())
            throw ParseError("row " + std::to_string(row_no) + ": empty unit id");
        if (!seen.insert(v.unit_id).second)
            throw ParseError("duplicate unit id '" + v.unit_id + "' at row " + std::to_string(row_no));
        v.dept_code = cell(c_dept);
        v.dept_desc = cell(c_deptdesc);
        v.make = cell(c_make);
        v.model = cell(c_model);
        try {
            v.model_year = std::stoi(cell(c_year));
        } catch (...) {
            throw ParseError("row " + std::to_string(row_no) + ": bad Year value '" + cell(c_year) + "'");
        }
        if (v.model_year < 1900 || v.model_year > 2100)
            throw ParseError("row " + std::to_string(row_no) + ": model year out of range: " +
                             std::to_string(v.model_year));
        v.purchase_cost = detail::parse_cost_field(cell(c_cost), "Purchase Cost", row_no);
        const std::string status = csv::normalize_header(cell(c_status));
        if (status == "a" || status == "active" || status == "activeunit")
            v.status = VehicleStatus::Active;
        else if (status == "s" || status == "disposed" || status == "disposedunit")
            v.status = VehicleStatus::Disposed;
        else
            throw ParseError("row " + std::to_string(row_no) + ": unknown status code '" +
                             cell(c_status) + "'");
        v.ltd_maint_cost = detail::parse_cost_field(cell(c_maint), "LTD Maint. Cost", row_no);
        v.ltd_fuel_cost = detail::parse_cost_field(cell(c_fuel), "LTD Fuel Cost", row_no);
        out.push_back(std::move(v));
    }
    return out;
}

// Maintenance table reader. No dedup: one record per data row, file order.
inline std::vector<MaintenanceRecord> parse_maintenance(const std::string& path) {
    const csv::Table table = csv::read_file(path);
    if (table.header.empty()) throw ParseError(path + ": missing header row");

    const auto& h = table.header;
    const std::size_t c_job = detail::require_column(h, {"jobid"}, "Job ID");
    const std::size_t c_unit = detail::require_column(h, {"unitno", "unit", "unitid"}, "Unit No");
    const std::size_t c_wo = detail::require_column(h, {"workorderno", "workorderid"}, "Work Order No");
    const std::size_t c_completed = detail::require_column(h, {"completeddate"}, "Completed Date");
    const std::size_t c_open = detail::require_column(h, {"opendate"}, "Open Date");
    const std::size_t c_system = detail::require_column(h, {"jobsystem", "systemcode"}, "Job System");
    const std::size_t c_sysdesc = detail::require_column(h, {"systdescr", "systemdesc", "systdescription"}, "Syst. Descr.");
    const std::size_t c_reason = detail::require_column(h, {"jobreason"}, "Job Reason");
    const std::size_t c_labor = detail::require_column(h, {"actuallaborcost", "laborcost"}, "Actual Labor Cost");
    const std::size_t c_comm = detail::require_column(h, {"commercialcost"}, "Commercial Cost");
    const std::size_t c_part = detail::require_column(h, {"partcost"}, "Part Cost");
    const std::size_t c_meter = detail::require_column(h, {"primarymeter", "odometer"}, "Primary Meter");

    std::vector<MaintenanceRecord> out;
    out.reserve(table.rows.size());
    std::size_t row_no = 1;
    for (const auto& row : table.rows) {
        ++row_no;
        const auto cell = [&](std::size_t c) -> const std::string& {
            static const std::string empty;
            return c < row.size() ? row[c] : empty;
        };
        MaintenanceRecord r;
        r.job_id = cell(c_job);
        r.unit_id = cell(c_unit);
        r.work_order_id = cell(c_wo);
        r.completed_date = detail::parse_date_field(cell(c_completed), "Completed Date", row_no);
        r.open_date = detail::parse_date_field(cell(c_open), "Open Date", row_no);
        r.system_code = cell(c_system);
        if (r.system_code.empty())
            throw ParseError("row " + std::to_string(row_no) + ": empty system code");
        r.system_desc = cell(c_sysdesc);
        r.job_reason = cell(c_reason);
        r.labor_cost = detail::parse_cost_field(cell(c_labor), "Actual Labor Cost", row_no);
        r.commercial_cost = detail::parse_cost_field(cell(c_comm), "Commercial Cost", row_no);
        r.part_cost = detail::parse_cost_field(cell(c_part), "Part Cost", row_no);
        r.job_cost = r.labor_cost + r.commercial_cost + r.part_cost;
        const std::string meter = cell(c_meter);
        if (!meter.empty()) {
            try {
                r.odometer = std::stoll(meter);
            } catch (...) {
                throw ParseError("row " + std::to_string(row_no) + ": bad Primary Meter value '" +
                                 meter + "'");
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

// Total cleaning pass: drops records before cutoff_year, reports orphans and
// inconsistent dates. Never throws on data content.
inline FleetDataset clean_and_filter(std::vector<MaintenanceRecord> records,
                                     std::vector<VehicleRecord> vehicles,
                                     int cutoff_year = 2010) {
    FleetDataset ds;
    ds.cutoff_year = cutoff_year;
    for (auto& v : vehicles) ds.vehicles.emplace(v.unit_id, std::move(v));

    std::set<std::string> orphan_set;
    std::set<std::string> flagged_set;
    for (auto& r : records) {
        if (r.completed_date.year < cutoff_year) continue;
        if (!ds.vehicles.contains(r.unit_id)) orphan_set.insert(r.unit_id);
        if (r.completed_date < r.open_date) flagged_set.insert(r.job_id);
        ds.records.push_back(std::move(r));
    }
    ds.orphan_units.assign(orphan_set.begin(), orphan_set.end());
    ds.inconsistent_date_jobs.assign(flagged_set.begin(), flagged_set.end());
    return ds;
}

// Writers emit the same two table schemas the readers accept, so generated
// fleets and cleaned datasets round-trip through parse_*.
inline void write_vehicles_csv(std::ostream& os, const std::vector<VehicleRecord>& vehicles) {
    csv::write_row(os, {"Unit#", "Dept#", "Dept Desc", "Make", "Model", "Year", "Purchase Cost",
                        "Status Code", "LTD Maint. Cost", "LTD Fuel Cost"});
    for (const auto& v : vehicles)
        csv::write_row(os, {v.unit_id, v.dept_code, v.dept_desc, v.make, v.model,
                            std::to_string(v.model_year), format_money(v.purchase_cost),
                            v.status == VehicleStatus::Active ? "A" : "S",
                            format_money(v.ltd_maint_cost), format_money(v.ltd_fuel_cost)});
}

inline void write_maintenance_csv(std::ostream& os, const std::vector<MaintenanceRecord>& records) {
    csv::write_row(os, {"Job ID", "Unit No", "Work Order No", "Open Date", "Completed Date",
                        "Job Reason", "Job System", "Syst. Descr.", "Actual Labor Cost",
                        "Commercial Cost", "Part Cost", "Primary Meter"});
    for (const auto& r : records)
        csv::write_row(os, {r.job_id, r.unit_id, r.work_order_id, format_date(r.open_date),
                            format_date(r.completed_date), r.job_reason, r.system_code,
                            r.system_desc, format_money(r.labor_cost),
                            format_money(r.commercial_cost), format_money(r.part_cost),
                            std::to_string(r.odometer)});
}

// One sequence per unit with >= 1 record, items ordered by
// (completed_date, job_id); sequences ordered by unit_id.
inline std::vector<MaintenanceSequence> extract_sequences(const FleetDataset& ds) {
    std::map<std::string, std::vector<MaintenanceSequence::Item>> by_unit;
    for (const auto& r : ds.records)
        by_unit[r.unit_id].push_back({r.system_code, r.completed_date, r.job_id});

    std::vector<MaintenanceSequence> out;
    out.reserve(by_unit.size());
    for (auto& [unit, items] : by_unit) {
        std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
            if (a.completed_date != b.completed_date) return a.completed_date < b.completed_date;
            return a.job_id < b.job_id;
        });
        out.push_back({unit, std::move(items)});
    }
    return out;
}

} // namespace fleetmine
