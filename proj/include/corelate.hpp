#pragma once

#include "corelate/cluster.hpp"
#include "corelate/community.hpp"
#include "corelate/egonet.hpp"
#include "corelate/error.hpp"
#include "corelate/graph.hpp"
#include "corelate/ingest.hpp"
#include "corelate/io.hpp"
#include "corelate/outlier.hpp"
#include "corelate/pipeline.hpp"
#include "corelate/reaction_filter.hpp"
#include "corelate/synth.hpp"
#include "corelate/taxonomy.hpp"
