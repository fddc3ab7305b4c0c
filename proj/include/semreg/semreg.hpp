#ifndef SEMREG_SEMREG_HPP_
#define SEMREG_SEMREG_HPP_

#include "semreg/common.hpp"
#include "semreg/config.hpp"
#include "semreg/fpfh.hpp"
#include "semreg/io.hpp"
#include "semreg/matching.hpp"
#include "semreg/metrics.hpp"
#include "semreg/pipeline.hpp"
#include "semreg/ransac.hpp"
#include "semreg/semantic.hpp"
#include "semreg/spatial_index.hpp"
#include "semreg/synth.hpp"
#include "semreg/transform.hpp"

#endif  // SEMREG_SEMREG_HPP_
