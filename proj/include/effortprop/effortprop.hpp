#pragma once

// Umbrella header for the effort assignment & propagation toolkit.

#include "effortprop/core.hpp"
#include "effortprop/heap.hpp"
#include "effortprop/ingest.hpp"
#include "effortprop/matrix.hpp"
#include "effortprop/oracle.hpp"
#include "effortprop/peap.hpp"
#include "effortprop/relation.hpp"
#include "effortprop/report.hpp"
#include "effortprop/verify.hpp"
