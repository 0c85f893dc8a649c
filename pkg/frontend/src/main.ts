import { ApiClient } from "./api";
import { mount } from "./app";

mount(document, new ApiClient(""));
