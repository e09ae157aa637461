"""Transit network: GTFS loading, RAPTOR routing, trajectory tracing."""
from .network import (Footpath, GTFSError, Projection, Stop, TransitNetwork, Trip, build_network,
                      load_gtfs, write_gtfs)
from .raptor import Itinerary, Leg, NoItinerary, RoutingError, RoutingParams, plan_trip
from .trace import Period, TraceError, Trajectory, simple_period, trace_trajectory
