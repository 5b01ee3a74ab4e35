#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "barriernet/market_data.hpp"

namespace barriernet {

// Parameters of the seeded geometric-random-walk universe generator.
// Annualized drift/volatility, 252 trading days per year.
struct SynthConfig {
    int tickers = 10;
    int days = 1300;
    std::uint64_t seed = 0;
    double drift = 0.05;
    double volatility = 0.35;
    double start_price_min = 5.0;
    double start_price_max = 500.0;
    double gap_volatility = 0.004;   // overnight open vs previous close
    double wick_scale = 0.6;         // intraday high/low extension vs daily sigma
    double mean_volume = 1.0e6;
    Date start_date = Date(2006, 1, 2);
};

// Stateless mixing of the global seed with a stream index; used so each ticker
// gets an independent, reproducible stream.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// One GBM daily series on a weekday calendar. Bars satisfy all Bar invariants.
OhlcvSeries generate_series(std::string ticker, int days, std::uint64_t seed,
                            const SynthConfig& cfg = {});

// `cfg.tickers` series named SYN000, SYN001, ... sorted by ticker.
std::vector<OhlcvSeries> generate_universe(const SynthConfig& cfg);

}  // namespace barriernet
