import traceback
from typing import List, Literal

from dotenv import load_dotenv
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from endpoints.inference import load_document, run_comparison, run_inference, validate_document
from models.report_models import InferenceReport, ValidationReport
from services.net_core_service import net_core_service
from utils.console import info, warn
from utils.errors import RecognetError

# === Load environment variables ===
load_dotenv()

app = FastAPI(title="recognet")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

EXAMPLE_BNET = """node h1 2
node h2 2
node E 2
arc h1 E
arc h2 E
cpt h1
row - : 0.5 0.5
cpt h2
row - : 0.5 0.5
cpt E
row 0 0 : 0.05 0.95
row 0 1 : 0.95 0.05
row 1 0 : 0.95 0.05
row 1 1 : 0.05 0.95
evidence E 0
"""


# === Pydantic Models for Validation ===
class NetRequest(BaseModel):
    bnet: str = Field(..., description="Network document in BNET text form")

    class Config:
        json_schema_extra = {"example": {"bnet": EXAMPLE_BNET}}


class InferRequest(NetRequest):
    solver: str = "auto"
    queries: List[str] = Field(default_factory=list)
    orientation: Literal["literal", "explicit"] = "literal"


class CompareRequest(NetRequest):
    solvers: List[str] = Field(..., min_length=2)
    queries: List[str] = Field(default_factory=list)
    orientation: Literal["literal", "explicit"] = "literal"


class ClassifyResponse(BaseModel):
    structure: str


# === Utility Functions ===
def to_http_error(e: RecognetError) -> HTTPException:
    warn(f"{e.code}: {e.message}")
    return HTTPException(status_code=422, detail={"code": e.code, "message": e.message, "details": e.details})


def unexpected(endpoint: str, e: Exception) -> HTTPException:
    print(f"🔥 ERROR in {endpoint}: {e}")
    print(f"🔍 Traceback: {traceback.format_exc()}")
    return HTTPException(status_code=500, detail=f"{endpoint} failed: {e}")


# === Endpoints ===
@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/validate", response_model=ValidationReport)
def validate(request: NetRequest):
    report = validate_document(text=request.bnet)
    info(f"✅ validate: valid={report.valid} structure={report.structure}")
    return report


@app.post("/classify", response_model=ClassifyResponse)
def classify(request: NetRequest):
    try:
        doc = load_document(text=request.bnet)
        return ClassifyResponse(structure=net_core_service.classify_structure(doc.net).value)
    except RecognetError as e:
        raise to_http_error(e)
    except Exception as e:
        raise unexpected("/classify", e)


@app.post("/infer", response_model=InferenceReport)
def infer(request: InferRequest):
    try:
        doc = load_document(text=request.bnet)
        info(f"🔧 infer: solver={request.solver} queries={request.queries}")
        return run_inference(doc, request.solver, request.queries, request.orientation)
    except RecognetError as e:
        raise to_http_error(e)
    except Exception as e:
        raise unexpected("/infer", e)


@app.post("/compare", response_model=InferenceReport)
def compare(request: CompareRequest):
    try:
        doc = load_document(text=request.bnet)
        info(f"🔧 compare: solvers={request.solvers}")
        return run_comparison(doc, request.solvers, request.queries, request.orientation)
    except RecognetError as e:
        raise to_http_error(e)
    except Exception as e:
        raise unexpected("/compare", e)
