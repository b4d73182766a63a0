#pragma once

#include "overcount/analytics.hpp"
#include "overcount/aoi_io.hpp"
#include "overcount/detection.hpp"
#include "overcount/error.hpp"
#include "overcount/evaluation.hpp"
#include "overcount/geometry.hpp"
#include "overcount/image.hpp"
#include "overcount/ingestion.hpp"
#include "overcount/interchange.hpp"
#include "overcount/merger.hpp"
#include "overcount/pipeline.hpp"
#include "overcount/tiler.hpp"
