"""IRI vocabulary shared by the mapping, rule, and query layers.

Namespaces follow the upstream municipal ontologies the graphs are written
against; the constants below are the subset of terms this engine actually
reads or writes.
"""

BDG = "https://standards.iso.org/iso-iec/5087/-2/ed-1/en/ontology/Building/"
CACENSUS = "http://ontology.eil.utoronto.ca/tove/cacensus#"
CODE = "https://standards.iso.org/iso-iec/5087/-2/ed-1/en/ontology/Code/"
GENPROP = "https://standards.iso.org/iso-iec/5087/-1/ed-1/en/ontology/GenericProperties/"
GEO = "http://www.opengis.net/ont/geosparql#"
HP = "http://ontology.eil.utoronto.ca/HPCDM/"
I72 = "http://ontology.eil.utoronto.ca/ISO21972/iso21972#"
LOC = "https://standards.iso.org/iso-iec/5087/-1/ed-1/en/ontology/SpatialLoc/"
LOC_OLD = "http://ontology.eil.utoronto.ca/5087/1/SpatialLoc/"
MER = "https://standards.iso.org/iso-iec/5087/-1/ed-1/en/ontology/Mereology/"
OPR = "http://www.theworldavatar.com/ontology/ontoplanningregulation/OntoPlanningRegulation.owl#"
ORG = "https://standards.iso.org/iso-iec/5087/-1/ed-1/en/ontology/Organization/"
OWL = "http://www.w3.org/2002/07/owl#"
OZ = "http://www.theworldavatar.com/ontology/ontozoning/OntoZoning.owl#"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
RES = "https://standards.iso.org/iso-iec/5087/-1/ed-1/en/ontology/Resource/"
SERVICE = "https://standards.iso.org/iso-iec/5087/-2/ed-1/en/ontology/CityService/"
TOR = "http://ontology.eil.utoronto.ca/Toronto/Toronto#"
XSD = "http://www.w3.org/2001/XMLSchema#"

# Core RDF/RDFS/OWL machinery
RDF_TYPE = RDF + "type"
RDFS_LABEL = RDFS + "label"
RDFS_COMMENT = RDFS + "comment"
RDFS_SUBCLASSOF = RDFS + "subClassOf"
RDFS_SUBPROPERTYOF = RDFS + "subPropertyOf"
OWL_INVERSEOF = OWL + "inverseOf"
OWL_THING = OWL + "Thing"
OWL_NOTHING = OWL + "Nothing"

# Geometry carriers
GEO_ASWKT = GEO + "asWKT"
GEO_WKT_LITERAL = GEO + "wktLiteral"
LOC_HASLOCATION = LOC + "hasLocation"
LOC_OLD_HASLOCATION = LOC_OLD + "hasLocation"

# Quantity / measure structure
I72_HASVALUE = I72 + "hasValue"
I72_HASNUMERICALVALUE = I72 + "hasNumericalValue"
I72_HASUNIT = I72 + "hasUnit"
I72_PARAMETER_OF_VAR = I72 + "parameter_of_var"
I72_DESCRIPTION_OF = I72 + "description_of"
I72_MAXIMUM_OF = I72 + "maximum_of"
I72_MINIMUM_OF = I72 + "minimum_of"
I72_HASNAME = I72 + "hasName"
I72_QUANTITY = I72 + "Quantity"
I72_METRE = I72 + "metre"
I72_SQUARE_METRE = I72 + "square_metre"
I72_POPULATION_CARDINALITY_UNIT = I72 + "population_cardinality_unit"

# Zoning pattern
HP_PARCEL = HP + "Parcel"
HP_ADMINISTRATIVE_AREA = HP + "AdministrativeArea"
HP_REGULATION = HP + "Regulation"
HP_ZONING_BYLAW = HP + "ZoningBylaw"
HP_ZONING_BYLAW_PART = HP + "ZoningBylawPart"
HP_ZONING_TYPE = HP + "ZoningType"
HP_DEFINED_FOR = HP + "definedFor"
HP_DEFINED_IN = HP + "definedIn"
HP_DEFINES_REGULATION = HP + "definesRegulation"
HP_REGULATION_DEFINED_IN = HP + "regulationDefinedIn"
HP_DESIGNATES_ZONING_TYPE = HP + "designatesZoningType"
HP_ZONING_TYPE_DESIGNATED_BY = HP + "zoningTypeDesignatedBy"
HP_SPECIFIES_CONSTRAINT = HP + "specifiesConstraint"
HP_APPLIES_TO = HP + "appliesTo"
HP_HAS_ZONE = HP + "hasZone"
HP_ZONED_AS_TYPE = HP + "zonedAsType"
HP_ZONED_FOR_CONSTRAINT = HP + "zonedForConstraint"
HP_SUB_ZONING_TYPE = HP + "subZoningType"
HP_CONSTRAINS = HP + "constrains"
HP_SPECIFIES_MAXIMUM_FOR = HP + "specifiesMaximumFor"
HP_SPECIFIES_MINIMUM_FOR = HP + "specifiesMinimumFor"
HP_QUANTITY_CONSTRAINT = HP + "QuantityConstraint"
HP_QUANTITY_ALLOWANCE = HP + "QuantityAllowance"
HP_QUANTITY_REQUIREMENT = HP + "QuantityRequirement"
HP_QUANTITY_EQUIVALENCE = HP + "QuantityEquivalence"
OPR_FOR_ZONING_TYPE = OPR + "forZoningType"
MER_HAS_PROPER_PART = MER + "hasProperPart"
MER_PROPER_PART_OF = MER + "properPartOf"

# Services
HP_SERVICE = HP + "Service"
HP_PROVIDED_FROM_SITE = HP + "providedFromSite"
HP_SERVICED_BY = HP + "servicedBy"
HP_HAS_SERVICE_RADIUS = HP + "hasServiceRadius"
SERVICE_HAS_CATCHMENT_AREA = SERVICE + "hasCatchmentArea"
RES_HAS_CAPACITY = RES + "hasCapacity"
RES_CAPACITY_IN_USE = RES + "capacityInUse"
RES_HAS_AVAILABLE_CAPACITY = RES + "hasAvailableCapacity"

# Buildings, ownership, land use
HP_OCCUPIES = HP + "occupies"
HP_OWNERSHIP = HP + "ownership"
HP_HAS_AREA = HP + "hasArea"
HP_HAS_PERIMETER = HP + "hasPerimeter"
HP_HAS_FRONTAGE = HP + "hasFrontage"
HP_HAS_FSI = HP + "hasFSI"
BDG_USE = BDG + "use"
CODE_HASCODE = CODE + "hasCode"
GENPROP_HASNAME = GENPROP + "hasName"
GENPROP_HASIDENTIFIER = GENPROP + "hasIdentifier"
OZ_ALLOWS_USE = OZ + "allowsUse"
ORG_GOVERNMENT_ORGANIZATION = ORG + "GovernmentOrganization"

# Census / demographics
CACENSUS_HASLOCATION = CACENSUS + "hasLocation"
TOR_IN_NEIGHBOURHOOD = TOR + "inNeighbourhood"
TOR_NEIGHBORHOOD = TOR + "Neighborhood"

# Reserved graph names
GRAPH_INFERRED = "urn:inferred"
GRAPH_SCHEMA = "urn:schema"
SYNTHETIC_GRAPH_PREFIX = "urn:synthetic/"

# Prefix table used by bundled fixture documents and the Turtle reader default
PREFIXES = {
    "bdg": BDG,
    "cacensus": CACENSUS,
    "code": CODE,
    "genprop": GENPROP,
    "geo": GEO,
    "hp": HP,
    "i72": I72,
    "loc": LOC,
    "loc_old": LOC_OLD,
    "mer": MER,
    "opr": OPR,
    "org": ORG,
    "owl": OWL,
    "oz": OZ,
    "rdf": RDF,
    "rdfs": RDFS,
    "res": RES,
    "service": SERVICE,
    "tor": TOR,
    "xsd": XSD,
}
