#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glinkx/dataset.hpp"
#include "glinkx/graph.hpp"
#include "glinkx/matrix.hpp"

namespace glinkx {

enum class Regime { homophilous, heterophilous, mixed, custom };
Regime parse_regime(const std::string& s);
const char* regime_name(Regime r);

struct PlantedConfig {
  std::size_t n = 2000;
  std::size_t c = 4;
  std::size_t k = 20;  // target mean degree
  Regime regime = Regime::homophilous;
  Matrix mixing;       // c x c, row a = class distribution of a class-a node's partners (custom)
  double homophily = 0.9;  // diagonal weight of the homophilous mixing matrix
  std::size_t d = 16;
  double sigma = 1.0;         // feature noise std
  double centroid_scale = 1.0;
  double train_frac = 0.5;
  double valid_frac = 0.25;
  std::uint64_t seed = 0;
};

struct PlantedGraph {
  Dataset data;            // single split
  Matrix mixing;           // mixing matrix of region 0
  std::vector<int> region; // 0 everywhere except the heterophilous half of the mixed regime
};

// p I + (1-p)/(c-1) (J - I).
Matrix homophily_mixing(std::size_t c, double p);
// Row a one-hot on class a^1 (classes paired 0-1, 2-3, ...); needs even c.
Matrix paired_mixing(std::size_t c);
// Diagonal weight p whose balanced-class graph has class-insensitive
// homophily h: p = h (c-1)/c + 1/c.
double calibrated_diagonal(double h, std::size_t c);

// Every node draws k/2 partners: a class from its mixing row, then a uniform
// node of that class (in its region). Edges are made undirected and deduped.
// Features are a per-class Gaussian centroid plus N(0, sigma^2) noise.
PlantedGraph generate_planted(const PlantedConfig& cfg);

// Fraction of 2-step walks i -> k -> j (j != i) with y_i == y_j.
double two_hop_agreement(const CsrGraph& g, const LabelVector& y);

}  // namespace glinkx
