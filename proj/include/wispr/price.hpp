#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wispr/topology.hpp"

namespace wispr {

struct PricePoint {
    std::string vendor;
    std::string model;
    double capacity_mbps = 0.0;
    double cost = 0.0;  // equipment for both ends of one link
};

// cost(C) = alpha*C^2 + beta*C + gamma
struct PriceModel {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double r_squared = 0.0;
};

struct SpectrumBudget {
    int channels_20mhz = 24;
    int channels_40mhz = 11;
    double min_angular_separation = 30.0;  // degrees
};

struct PlanResult {
    Topology topology;
    double total_cost = 0.0;
    double capacity_mbps = 0.0;
    int links_added = 0;
    int links_replaced = 0;
    // Capacity after each added link, for the max-capacity procedure.
    std::vector<double> capacity_trace;
};

std::vector<PricePoint> load_price_csv(const std::filesystem::path& file);

// Least-squares quadratic fit of cost on capacity. Requires >= 3 distinct
// capacities.
PriceModel fit_price_model(const std::vector<PricePoint>& points);

double link_cost(const PriceModel& model, double capacity_mbps);

// Cost of replacing one link of the given capacity with n parallel links of
// capacity C/n each.
double multiplicity_cost(const PriceModel& model, double capacity_mbps, int n);

// argmin over n in [1, n_max] of multiplicity_cost, smaller n on ties.
int optimal_multiplicity(const PriceModel& model, double capacity_mbps, int n_max);

double topology_cost(const PriceModel& model, const Topology& topo);

// True iff the site's incident links fit the per-width channel budgets under
// greedy first-fit channel assignment with the angular separation rule.
bool spectrum_feasible(const Topology& topo, const std::string& site,
                       const SpectrumBudget& budget);

// Replace each link with its cost-optimal parallel multiplicity, skipping
// replacements that would break spectrum feasibility at either endpoint.
PlanResult min_cost_redesign(const PriceModel& model, const Topology& topo,
                             const SpectrumBudget& budget, int n_max);

// Repeatedly bridge the current min cut with candidate links of unit_capacity
// while budget headroom and spectrum allow.
PlanResult max_capacity_redesign(const PriceModel& model, const Topology& topo,
                                 const SpectrumBudget& budget, double cost_ceiling,
                                 const std::vector<std::pair<std::string, std::string>>& candidates,
                                 double unit_capacity_mbps);

}  // namespace wispr
